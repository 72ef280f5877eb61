import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import special, stats as sps

from ecgrev.stats import betainc, t_sf, welch_t_test

from oracles import permutation_p_greater


@settings(max_examples=200, deadline=None)
@given(st.floats(0.05, 200), st.floats(0.05, 200), st.floats(0, 1))
def test_betainc_matches_scipy(a, b, x):
    assert betainc(a, b, x) == pytest.approx(special.betainc(a, b, x), rel=1e-9, abs=1e-12)


def test_t_sf_matches_scipy():
    for df in (1.0, 2.5, 7.0, 30.0, 998.0):
        for t in (-5.0, -1.0, 0.0, 0.3, 2.0, 40.0):
            assert t_sf(t, df) == pytest.approx(sps.t.sf(t, df), rel=1e-8, abs=1e-300)


def test_identical_samples():
    a = [1.0, 2.0, 3.0, 4.0]
    res = welch_t_test(a, a, "two-sided")
    assert res.t == 0 and res.p == 1.0


def test_worked_example_and_permutation_oracle():
    a = [10.1, 10.2, 9.9, 10.0]
    b = [0.1, 0.2, -0.1, 0.0]
    res = welch_t_test(a, b, "greater")
    assert res.p < 1e-6
    # exact permutation p for 4 vs 4 is 1/70; the t-test must be at least as extreme
    perm = permutation_p_greater(a, b, 5000, np.random.default_rng(0))
    assert res.p <= perm
    assert res.p == pytest.approx(sps.ttest_ind(a, b, equal_var=False, alternative="greater").pvalue, rel=1e-8)


def test_antisymmetry(rng):
    a, b = rng.normal(1, 1, 12), rng.normal(0, 2, 9)
    assert welch_t_test(a, b).t == pytest.approx(-welch_t_test(b, a).t)


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 30), st.integers(2, 30), st.integers(0, 2**32 - 1))
def test_matches_scipy_welch(na, nb, seed):
    rng = np.random.default_rng(seed)
    a, b = rng.normal(0.3, 1, na), rng.normal(0, 1.5, nb)
    for alt in ("greater", "two-sided"):
        ours = welch_t_test(a, b, alt)
        ref = sps.ttest_ind(a, b, equal_var=False, alternative=alt)
        assert ours.t == pytest.approx(ref.statistic, rel=1e-10)
        assert ours.p == pytest.approx(ref.pvalue, rel=1e-7, abs=1e-300)
        assert 0 < ours.p <= 1


def test_tiny_p_values_resolved():
    a = np.linspace(0.6, 1.0, 40)
    b = np.linspace(0.0, 0.4, 40)
    res = welch_t_test(a, b)
    assert 0 < res.p < 1e-30
    assert res.p == pytest.approx(sps.ttest_ind(a, b, equal_var=False, alternative="greater").pvalue, rel=1e-6)


def test_degenerate():
    assert welch_t_test([2.0, 2.0], [1.0, 1.0]).p == 0.0
    assert welch_t_test([1.0, 1.0], [2.0, 2.0]).p == 1.0
    with pytest.raises(ValueError):
        welch_t_test([1.0, 1.0], [1.0, 1.0])
    with pytest.raises(ValueError):
        welch_t_test([1.0], [2.0, 3.0])
