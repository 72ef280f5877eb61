"""Detection metrics, G-mean operating point, neighbour-label study and 2-D projection."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import NamedTuple

import numpy as np

from .stats import Alternative, TTestResult, welch_t_test

SCHEMA_VERSION = 1


def _check_binary(scores, labels):
    s = np.asarray(scores, dtype=np.float64).ravel()
    y = np.asarray(labels).ravel().astype(np.int64)
    if s.shape != y.shape:
        raise ValueError("scores and labels must have the same length")
    if not np.all((y == 0) | (y == 1)):
        raise ValueError("labels must be 0/1")
    return s, y


def _require_both_classes(y):
    if y.sum() == 0 or y.sum() == y.size:
        raise ValueError("both classes must be present")


def average_ranks(values) -> np.ndarray:
    """1-based ranks; tied values share the mean of the ranks they span."""
    v = np.asarray(values, dtype=np.float64)
    order = np.argsort(v, kind="mergesort")
    sorted_v = v[order]
    boundaries = np.flatnonzero(np.diff(sorted_v)) + 1
    starts = np.concatenate([[0], boundaries])
    ends = np.concatenate([boundaries, [v.size]])
    ranks = np.empty(v.size)
    for s, e in zip(starts, ends):
        ranks[order[s:e]] = (s + e + 1) / 2.0
    return ranks


def auc(scores, labels) -> float:
    """ROC AUC as the Mann-Whitney statistic; ties count one half."""
    s, y = _check_binary(scores, labels)
    _require_both_classes(y)
    n_pos = int(y.sum())
    n_neg = y.size - n_pos
    r = average_ranks(s)
    wins = r[y == 1].sum() - n_pos * (n_pos + 1) / 2.0
    return float(wins / (n_pos * n_neg))


class ThresholdChoice(NamedTuple):
    threshold: float
    sensitivity: float
    specificity: float

    @property
    def gmean(self) -> float:
        return math.sqrt(self.sensitivity * self.specificity)


def threshold_candidates(scores) -> np.ndarray:
    u = np.unique(np.asarray(scores, dtype=np.float64))
    mids = (u[:-1] + u[1:]) / 2.0
    return np.concatenate([[np.nextafter(u[0], -np.inf)], mids, [np.nextafter(u[-1], np.inf)]])


def gmean_threshold(scores, labels) -> ThresholdChoice:
    """Threshold maximizing sqrt(sens * spec) over midpoint candidates; ties go to the larger one."""
    s, y = _check_binary(scores, labels)
    _require_both_classes(y)
    cands = threshold_candidates(s)
    n_pos = int(y.sum())
    n_neg = y.size - n_pos
    order = np.argsort(s, kind="mergesort")
    s_sorted, y_sorted = s[order], y[order]
    # number of samples with score <= threshold, per class
    k = np.searchsorted(s_sorted, cands, side="right")
    pos_le = np.concatenate([[0], np.cumsum(y_sorted)])[k]
    neg_le = k - pos_le
    sens = (n_pos - pos_le) / n_pos
    spec = neg_le / n_neg
    g = np.sqrt(sens * spec)
    best = np.flatnonzero(g == g.max())[-1]
    return ThresholdChoice(float(cands[best]), float(sens[best]), float(spec[best]))


@dataclass
class MetricsReport:
    auc: float
    sensitivity: float
    specificity: float
    accuracy: float
    threshold: float
    TP: int
    TN: int
    FP: int
    FN: int
    task: str = ""
    d: int = 0
    n_train: int = 0
    seed: int = 0
    extra: dict = field(default_factory=dict)

    @property
    def gmean(self) -> float:
        return math.sqrt(self.sensitivity * self.specificity)

    def to_dict(self, timestamp: str | None = None) -> dict:
        out = {"schema_version": SCHEMA_VERSION}
        out.update({k: v for k, v in asdict(self).items() if k != "extra"})
        out.update(self.extra)
        out["timestamp"] = timestamp
        return out

    def write_json(self, path, timestamp: str | None = None) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(timestamp), fh, indent=2, sort_keys=True)
            fh.write("\n")


def confusion_metrics(scores, labels, threshold: float) -> MetricsReport:
    """Counts and ratios for the rule ``score > threshold``; AUC is left as NaN."""
    s, y = _check_binary(scores, labels)
    pred = s > threshold
    tp = int(np.sum(pred & (y == 1)))
    fn = int(np.sum(~pred & (y == 1)))
    fp = int(np.sum(pred & (y == 0)))
    tn = int(np.sum(~pred & (y == 0)))
    sens = tp / (tp + fn) if tp + fn else float("nan")
    spec = tn / (tn + fp) if tn + fp else float("nan")
    acc = (tp + tn) / y.size if y.size else float("nan")
    return MetricsReport(float("nan"), sens, spec, acc, float(threshold), tp, tn, fp, fn)


def evaluate_scores(scores, labels, task="", d=0, n_train=0, seed=0) -> MetricsReport:
    """AUC plus confusion metrics at the G-mean-optimal threshold of these very scores."""
    choice = gmean_threshold(scores, labels)
    report = confusion_metrics(scores, labels, choice.threshold)
    report.auc = auc(scores, labels)
    report.task, report.d, report.n_train, report.seed = task, int(d), int(n_train), int(seed)
    return report


def knn_indices(reps, k: int = 3, chunk: int = 128) -> np.ndarray:
    """Exact Euclidean k nearest neighbours, self excluded, ties resolved by lower index."""
    x = np.asarray(reps, dtype=np.float64)
    n = x.shape[0]
    if n <= k:
        raise ValueError(f"need more than k={k} points, got {n}")
    out = np.empty((n, k), dtype=np.int64)
    for start in range(0, n, chunk):
        block = x[start:start + chunk]
        d2 = ((block[:, None, :] - x[None, :, :]) ** 2).sum(axis=-1)
        d2[np.arange(block.shape[0]), np.arange(start, start + block.shape[0])] = np.inf
        out[start:start + block.shape[0]] = np.argsort(d2, axis=1, kind="stable")[:, :k]
    return out


def knn_label_means(reps, labels, k: int = 3) -> np.ndarray:
    """Mean label of each point's k nearest neighbours."""
    y = np.asarray(labels, dtype=np.float64)
    nn_idx = knn_indices(reps, k)
    return y[nn_idx].mean(axis=1)


@dataclass
class NeighborStudy:
    means: np.ndarray
    labels: np.ndarray
    k: int
    test: TTestResult
    alternative: str

    def to_dict(self, timestamp=None) -> dict:
        pos = self.means[self.labels == 1]
        neg = self.means[self.labels == 0]
        return {
            "schema_version": SCHEMA_VERSION,
            "k": self.k,
            "n_af": int(pos.size),
            "n_normal": int(neg.size),
            "mean_af": float(pos.mean()),
            "mean_normal": float(neg.mean()),
            "test": "welch",
            "alternative": self.alternative,
            "t": self.test.t,
            "df": self.test.df,
            "p": self.test.p,
            "timestamp": timestamp,
        }


def neighbor_study(reps, labels, k: int = 3, alternative=Alternative.GREATER) -> NeighborStudy:
    """k-NN label means, then Welch test of AF-segment means against Normal-segment means."""
    y = np.asarray(labels).astype(np.int64)
    means = knn_label_means(reps, y, k)
    res = welch_t_test(means[y == 1], means[y == 0], alternative)
    return NeighborStudy(means, y, k, res, Alternative(alternative).value)


def project_2d(reps) -> np.ndarray:
    """Top-two principal coordinates; each axis is signed so its largest-magnitude loading is positive."""
    x = np.asarray(reps, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 2:
        raise ValueError("need at least 2 representations")
    xc = x - x.mean(axis=0)
    _, _, vt = np.linalg.svd(xc, full_matrices=False)
    comps = vt[:2]
    if comps.shape[0] < 2:
        comps = np.vstack([comps, np.zeros((2 - comps.shape[0], x.shape[1]))])
    for i, c in enumerate(comps):
        if c[np.argmax(np.abs(c))] < 0:
            comps[i] = -c
    return xc @ comps.T
