import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from ecgrev.signal import EcgRecord, Label, SegmentSet, normalize, segment, segment_records


def _record(n, fs=300):
    return EcgRecord("r", np.sin(np.arange(n) / 7.0), fs, Label.NORMAL)


@pytest.mark.parametrize("n, expected", [(9000, 5), (18300, 11), (2700, 0), (3000, 1), (4499, 1), (4500, 2)])
def test_window_count(n, expected):
    wins = segment(_record(n))
    assert len(wins) == expected
    if n >= 3000:
        assert expected == (n - 3000) // 1500 + 1


def test_window_offsets_and_slices():
    rec = _record(9000)
    wins = segment(rec)
    assert [w.offset for w in wins] == [0, 1500, 3000, 4500, 6000]
    for w in wins:
        assert w.samples.size == 3000
        np.testing.assert_array_equal(w.samples, rec.samples[w.offset:w.offset + 3000])


def test_61_second_record_offsets_by_enumeration():
    wins = segment(_record(61 * 300))
    assert [w.offset for w in wins] == list(range(0, 15300 + 1, 1500))


def test_normalize_linear_map():
    w = np.tile([2.0, 4.0, 6.0], 1000)
    seg = normalize(w)
    np.testing.assert_array_equal(seg.samples[:3], [0.0, 0.5, 1.0])
    assert not seg.degenerate


def test_normalize_constant_is_degenerate():
    seg = normalize(np.full(3000, 0.7))
    assert seg.degenerate
    assert np.all(seg.samples == 0)


def test_normalize_rejects_wrong_length():
    with pytest.raises(ValueError):
        normalize(np.arange(10.0))


@settings(max_examples=60, deadline=None)
@given(arrays(np.float64, 3000, elements=st.floats(-1e3, 1e3, allow_nan=False)))
def test_normalize_idempotent_and_spans_unit_interval(x):
    once = normalize(x)
    twice = normalize(once.samples)
    np.testing.assert_array_equal(once.samples, twice.samples)
    if not once.degenerate:
        assert once.samples.min() == 0.0 and once.samples.max() == 1.0
    assert np.all((once.samples >= 0) & (once.samples <= 1))


def test_record_invariants():
    with pytest.raises(ValueError):
        EcgRecord("x", np.zeros(10), fs=0)
    with pytest.raises(ValueError):
        EcgRecord("x", np.zeros(0))
    with pytest.raises(ValueError):
        EcgRecord("x", np.zeros(300), annotations=[0.5, 0.2])
    with pytest.raises(ValueError):
        EcgRecord("x", np.zeros(300), annotations=[0.5, 1.5])


def test_segment_records_drops_degenerate_and_keeps_labels():
    recs = [EcgRecord("flat", np.zeros(3000), label=Label.AF), _record(6000)]
    ss = segment_records(recs)
    assert len(ss) == 3
    assert ss.source_ids == ["r", "r", "r"]
    assert list(ss.labels) == [0, 0, 0]
    assert len(segment_records(recs, keep_degenerate=True)) == 4


def test_unlabeled_records_give_unlabeled_set():
    ss = segment_records([EcgRecord("u", np.sin(np.arange(3000.0)))])
    assert ss.labels is None


def test_segment_set_concat_and_take():
    a = SegmentSet(np.ones((2, 5)), ["a", "a"], np.array([0, 1]), np.array([1, 1]))
    b = SegmentSet(np.zeros((1, 5)), ["b"], np.array([0]), np.array([0]))
    c = SegmentSet.concat([a, b])
    assert len(c) == 3 and list(c.labels) == [1, 1, 0]
    assert c.take([2]).source_ids == ["b"]
