import numpy as np
import pytest
import torch

torch.set_num_threads(1)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_normalized(rng, n, length=3000):
    """Random segments with exact min 0 / max 1 per row."""
    from ecgrev.signal import minmax_scale

    raw = rng.normal(size=(n, length)).cumsum(axis=1)
    return np.stack([minmax_scale(r)[0] for r in raw])


CRITERIA: list[str] = []


@pytest.fixture
def criterion():
    """Record one acceptance line; printed together in the terminal summary."""

    def record(number: int, name: str, passed: bool, detail: str):
        CRITERIA.append(f"criterion {number:>2} {'PASS' if passed else 'FAIL'}  {name}: {detail}")
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in sorted(CRITERIA, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
