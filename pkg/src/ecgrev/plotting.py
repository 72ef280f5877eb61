"""Matplotlib figures written next to the CSV/JSON outputs. Headless (Agg) only."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

_SAVE = {"dpi": 110, "metadata": {"Software": None}}


def _save(fig, path) -> Path:
    path = Path(path)
    fig.tight_layout()
    fig.savefig(path, **_SAVE)
    plt.close(fig)
    return path


def training_curve(history: list[dict], path, title: str = "") -> Path:
    fig, ax = plt.subplots(figsize=(6, 3.5))
    epochs = [h["epoch"] for h in history]
    ax.plot(epochs, [h["loss"] for h in history], "o-", color="tab:blue", label="loss")
    ax.set_xlabel("epoch")
    ax.set_ylabel("loss", color="tab:blue")
    acc = [h.get("pretext_accuracy", float("nan")) for h in history]
    if np.isfinite(acc).any():
        ax2 = ax.twinx()
        ax2.plot(epochs, acc, "s--", color="tab:orange")
        ax2.set_ylim(0, 1.02)
        ax2.set_ylabel("held-out pretext accuracy", color="tab:orange")
    ax.set_title(title)
    return _save(fig, path)


def roc_curve(scores, labels, path, auc_value: float | None = None, threshold: float | None = None) -> Path:
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels).astype(bool)
    thr = np.concatenate([[np.inf], np.unique(s)[::-1], [-np.inf]])
    tpr = [(s[y] >= t).mean() for t in thr]
    fpr = [(s[~y] >= t).mean() for t in thr]
    fig, ax = plt.subplots(figsize=(4, 4))
    ax.plot(fpr, tpr, color="tab:red", label=None if auc_value is None else f"AUC {auc_value:.3f}")
    ax.plot([0, 1], [0, 1], ":", color="grey")
    if threshold is not None:
        ax.plot((s[~y] > threshold).mean(), (s[y] > threshold).mean(), "ko", label=f"threshold {threshold:.3g}")
    ax.set_xlabel("1 - specificity")
    ax.set_ylabel("sensitivity")
    ax.legend(loc="lower right")
    return _save(fig, path)


def auc_vs_n(rows: list[dict], path) -> Path:
    """Median AUC against fine-tune size, one line per (task, dim)."""
    fig, ax = plt.subplots(figsize=(6.5, 4))
    keys = sorted({(r["task"], int(r["dim"])) for r in rows})
    for task, dim in keys:
        cell = [r for r in rows if r["task"] == task and int(r["dim"]) == dim]
        ns = sorted({int(r["n_train"]) for r in cell})
        med = [np.median([float(r["auc"]) for r in cell if int(r["n_train"]) == n]) for n in ns]
        ax.plot(ns, med, "o-", label=f"{task} d={dim}")
    ax.set_xscale("log")
    ax.set_xlabel("fine-tune segments")
    ax.set_ylabel("AUC (median over seeds)")
    ax.legend(fontsize=7)
    return _save(fig, path)


def projection_scatter(points: np.ndarray, labels: list[str], path) -> Path:
    fig, ax = plt.subplots(figsize=(5, 5))
    labels = np.asarray(labels)
    colors = {"Normal": "tab:blue", "AF": "tab:red", "Unlabeled": "tab:grey"}
    for name in ("Normal", "AF", "Unlabeled"):
        m = labels == name
        if m.any():
            ax.scatter(points[m, 0], points[m, 1], s=8, alpha=0.7, color=colors[name], label=name)
    ax.set_xlabel("PC 1")
    ax.set_ylabel("PC 2")
    ax.legend()
    return _save(fig, path)


def neighbor_hist(means: np.ndarray, labels: np.ndarray, path) -> Path:
    fig, ax = plt.subplots(figsize=(5, 3.5))
    bins = np.linspace(0, 1, 12)
    ax.hist(means[labels == 0], bins=bins, alpha=0.6, label="Normal", color="tab:blue")
    ax.hist(means[labels == 1], bins=bins, alpha=0.6, label="AF", color="tab:red")
    ax.set_xlabel("mean neighbour label")
    ax.set_ylabel("segments")
    ax.legend()
    return _save(fig, path)


def relevance_trace(samples: np.ndarray, relevance: np.ndarray, path, fs: int = 300, title: str = "") -> Path:
    from matplotlib.collections import LineCollection

    t = np.arange(samples.size) / fs
    mag = np.abs(relevance)
    level = mag / mag.max() if mag.max() > 0 else np.zeros_like(mag)
    pts = np.stack([t, samples], axis=1)
    segs = np.stack([pts[:-1], pts[1:]], axis=1)
    fig, ax = plt.subplots(figsize=(10, 2.6))
    lc = LineCollection(segs, cmap="inferno", linewidth=1.4)
    lc.set_array((level[:-1] + level[1:]) / 2)
    lc.set_clim(0, 1)
    ax.add_collection(lc)
    ax.set_facecolor("#222222")
    ax.set_xlim(t[0], t[-1])
    ax.set_ylim(-0.05, 1.05)
    ax.set_xlabel("time (s)")
    ax.set_title(title)
    fig.colorbar(lc, ax=ax, label="|R| (normalized)")
    return _save(fig, path)
