import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ecgrev.evaluation import (MetricsReport, auc, confusion_metrics, evaluate_scores, gmean_threshold,
                               knn_label_means, neighbor_study, project_2d)

from oracles import auc_pairs, gmean_scan, knn_means_bruteforce


def test_auc_worked_example():
    assert auc([0.1, 0.4, 0.35, 0.8], [0, 0, 1, 1]) == 0.75
    assert auc_pairs([0.1, 0.4, 0.35, 0.8], [0, 0, 1, 1]) == 0.75


def test_auc_extremes():
    assert auc([0.1, 0.2, 0.8, 0.9], [0, 0, 1, 1]) == 1.0
    assert auc([0.5] * 6, [0, 1, 0, 1, 0, 1]) == 0.5


def test_auc_single_class():
    with pytest.raises(ValueError):
        auc([0.1, 0.2], [1, 1])


@settings(max_examples=100, deadline=None)
@given(st.integers(2, 50), st.integers(0, 2**32 - 1))
def test_auc_matches_pair_oracle_with_ties(n, seed):
    rng = np.random.default_rng(seed)
    y = rng.integers(0, 2, n)
    y[0], y[1] = 0, 1
    s = rng.integers(0, 6, n) / 5.0  # coarse grid forces ties
    assert auc(s, y) == auc_pairs(s.tolist(), y.tolist())


def test_auc_invariant_to_monotone_transform(rng):
    y = rng.integers(0, 2, 40)
    y[:2] = [0, 1]
    s = rng.normal(size=40)
    assert auc(s, y) == auc(np.exp(3 * s) + 7, y)


def test_gmean_worked_example():
    t = gmean_threshold([0.1, 0.4, 0.6, 0.9], [0, 0, 1, 1])
    assert t.threshold == 0.5 and t.sensitivity == 1 and t.specificity == 1 and t.gmean == 1


def test_gmean_value():
    assert math.isclose(math.sqrt(0.8 * 0.9), 0.848528137423857)


def test_gmean_anti_separated_picks_extreme():
    s = [0.9, 0.8, 0.2, 0.1]
    y = [0, 0, 1, 1]
    t = gmean_threshold(s, y)
    assert gmean_scan(s, y) == (t.threshold, t.sensitivity, t.specificity)
    assert t.threshold > max(s) or t.threshold < min(s) or t.gmean < 1
    assert t.gmean == 0.0 and t.threshold > max(s)


@settings(max_examples=100, deadline=None)
@given(st.integers(2, 40), st.integers(0, 2**32 - 1))
def test_gmean_matches_exhaustive_scan(n, seed):
    rng = np.random.default_rng(seed)
    y = rng.integers(0, 2, n)
    y[0], y[1] = 0, 1
    s = np.round(rng.random(n), 1)
    t = gmean_threshold(s, y)
    assert (t.threshold, t.sensitivity, t.specificity) == gmean_scan(s.tolist(), y.tolist())


def test_confusion_worked_example():
    r = confusion_metrics([0.2, 0.6, 0.7, 0.9], [0, 1, 0, 1], 0.65)
    assert (r.TP, r.FN, r.FP, r.TN) == (1, 1, 1, 1)
    assert r.sensitivity == r.specificity == r.accuracy == 0.5


def test_confusion_extreme_thresholds():
    s, y = [0.2, 0.6, 0.7, 0.9], [0, 1, 0, 1]
    lo = confusion_metrics(s, y, 0.0)
    hi = confusion_metrics(s, y, 1.0)
    assert (lo.sensitivity, lo.specificity) == (1, 0)
    assert (hi.sensitivity, hi.specificity) == (0, 1)


def test_confusion_identities(rng):
    for _ in range(20):
        y = rng.integers(0, 2, 30)
        r = confusion_metrics(rng.random(30), y, rng.random())
        assert r.TP + r.FN == y.sum() and r.TN + r.FP == (y == 0).sum()
        assert r.accuracy == (r.TP + r.TN) / 30


def test_evaluate_scores_report(tmp_path):
    rep = evaluate_scores([0.1, 0.4, 0.6, 0.9], [0, 0, 1, 1], task="ts", d=128, n_train=50, seed=1)
    assert rep.auc == 1.0 and rep.accuracy == 1.0 and rep.threshold == 0.5
    d = rep.to_dict("T")
    for key in ("auc", "sensitivity", "specificity", "accuracy", "threshold", "TP", "TN", "FP", "FN",
                "task", "d", "n_train", "seed", "schema_version", "timestamp"):
        assert key in d
    rep.write_json(tmp_path / "r.json", "T")
    assert (tmp_path / "r.json").read_text().count('"auc"') == 1


def test_knn_worked_example():
    # query at 0; its three nearest carry labels 1, 1, 0
    x = np.array([[0.0], [1.0], [2.0], [3.0], [10.0]])
    y = np.array([0, 1, 1, 0, 1])
    assert knn_label_means(x, y, 3)[0] == pytest.approx(2 / 3)


def test_knn_uniform_labels(rng):
    x = rng.normal(size=(20, 3))
    assert np.all(knn_label_means(x, np.ones(20), 3) == 1)


def test_knn_two_clusters(rng):
    x = np.vstack([rng.normal(0, 0.1, (15, 4)), rng.normal(100, 0.1, (15, 4))])
    y = np.array([0] * 15 + [1] * 15)
    np.testing.assert_array_equal(knn_label_means(x, y, 3), y)
    np.testing.assert_array_equal(knn_means_bruteforce(x.tolist(), y.tolist(), 3), y)


def test_knn_matches_bruteforce(rng):
    for _ in range(5):
        n = int(rng.integers(5, 60))
        x = rng.normal(size=(n, 3))
        y = rng.integers(0, 2, n)
        np.testing.assert_array_equal(knn_label_means(x, y, 3), knn_means_bruteforce(x.tolist(), y.tolist(), 3))


def test_knn_ties_by_index():
    x = np.zeros((5, 2))
    y = np.array([0, 1, 1, 1, 0])
    # all distances tie: neighbours of 0 are 1,2,3; of 4 are 0,1,2
    np.testing.assert_allclose(knn_label_means(x, y, 3), [1, 2 / 3, 2 / 3, 2 / 3, 2 / 3])


def test_knn_too_few():
    with pytest.raises(ValueError):
        knn_label_means(np.zeros((3, 2)), [0, 1, 0], 3)


def test_neighbor_study_separated(rng):
    x = np.vstack([rng.normal(0, 1, (30, 4)), rng.normal(6, 1, (30, 4))])
    y = np.array([0] * 30 + [1] * 30)
    study = neighbor_study(x, y)
    assert study.test.p < 1e-6
    d = study.to_dict()
    assert d["mean_af"] > d["mean_normal"] and d["alternative"] == "greater"


def test_project_collinear(rng):
    t = rng.normal(size=30)
    x = np.outer(t, [1.0, 2.0, -1.0, 0.5])
    assert np.all(np.abs(project_2d(x)[:, 1]) < 1e-5)


def test_project_rotation_preserves_geometry(rng):
    x = rng.normal(size=(40, 6)) * np.array([5, 3, 1, 0.5, 0.2, 0.1])
    q, _ = np.linalg.qr(rng.normal(size=(6, 6)))
    p1, p2 = project_2d(x), project_2d(x @ q)
    d1 = np.linalg.norm(p1[:, None] - p1[None], axis=-1)
    d2 = np.linalg.norm(p2[:, None] - p2[None], axis=-1)
    np.testing.assert_allclose(d1, d2, atol=1e-5)


def test_project_duplicates_and_sign(rng):
    x = rng.normal(size=(10, 5))
    x[3] = x[7]
    p = project_2d(x)
    np.testing.assert_array_equal(p[3], p[7])
    np.testing.assert_array_equal(p, project_2d(x))
    with pytest.raises(ValueError):
        project_2d(x[:1])


def test_metrics_report_identities():
    r = MetricsReport(0.9, 0.5, 0.75, 0.6, 0.5, TP=1, TN=3, FP=1, FN=1)
    assert r.gmean == pytest.approx(math.sqrt(0.375))
