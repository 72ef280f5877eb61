"""Acceptance run: one test (and one summary line) per criterion, at the stated tolerances.

Criteria 1-8 are deterministic oracle checks. Criteria 9-12 train on synthetic
data with seeds 0, 1, 2 and compare medians.
"""

import math
import time

import numpy as np
import pytest
import torch

from ecgrev.benchmark import BenchmarkConfig, median_summary, run_benchmark
from ecgrev.evaluation import auc, evaluate_scores, gmean_threshold, knn_label_means
from ecgrev.ingest import SplitSpec, load_records, read_manifest, split, split_records, write_corpus
from ecgrev.models import fresh_encoder
from ecgrev.nn import EncoderConfig, ntxent_loss, ntxent_pairing
from ecgrev.pipelines import (FinetuneConfig, PretrainConfig, fit_pca, fit_rp, finetune, pretrain,
                              train_from_scratch)
from ecgrev.signal import segment_records
from ecgrev.synth import SynthParams, synth_corpus
from ecgrev.transforms import spatial_reverse, temporal_reverse, ts_reverse

from conftest import random_normalized
from gradcases import CASES, smooth_point
from lrpcases import conservation_errors
from oracles import auc_pairs, gmean_scan, knn_means_bruteforce

SEEDS = (0, 1, 2)
LEARNING_BUDGET_S = 15 * 60


# Segments live on [0, 1]; spatial reversal maps values near 0 onto values near 1,
# so deviations are counted in float32 ulps at unit scale rather than per value.
UNIT_ULP = float(np.spacing(np.float32(1.0)))


def ulp_distance(a, b) -> float:
    """Largest deviation between two [0, 1] arrays in float32 ulps of 1.0."""
    d = np.abs(np.asarray(a, np.float64) - np.asarray(b, np.float64))
    return float(d.max()) / UNIT_ULP


def test_c01_transform_involutions(criterion):
    x = random_normalized(np.random.default_rng(1), 1000)
    worst = max(
        ulp_distance(temporal_reverse(temporal_reverse(x)), x),
        ulp_distance(spatial_reverse(spatial_reverse(x)), x),
        ulp_distance(ts_reverse(ts_reverse(x)), x),
        ulp_distance(temporal_reverse(spatial_reverse(x)), spatial_reverse(temporal_reverse(x))),
        ulp_distance(ts_reverse(x), temporal_reverse(spatial_reverse(x))),
    )
    ok = criterion(1, "transform involutions/commutation", worst <= 1, f"max deviation {worst:.2f} ulp(1.0) over 1000 segments")
    assert ok


def test_c02_auc_oracle(criterion):
    rng = np.random.default_rng(2)
    mismatches = 0
    for _ in range(200):
        n = int(rng.integers(2, 51))
        y = rng.integers(0, 2, n)
        y[rng.choice(n, 2, replace=False)] = [0, 1]
        s = rng.integers(0, 8, n) / 7.0
        mismatches += auc(s, y) != auc_pairs(s.tolist(), y.tolist())
    example = auc([0.1, 0.4, 0.35, 0.8], [0, 0, 1, 1])
    ok = criterion(2, "AUC vs pair counting", mismatches == 0 and example == 0.75,
                   f"{mismatches}/200 mismatches, worked example {example}")
    assert ok


def test_c03_gmean_oracle(criterion):
    rng = np.random.default_rng(3)
    mismatches = 0
    for _ in range(200):
        n = int(rng.integers(2, 51))
        y = rng.integers(0, 2, n)
        y[rng.choice(n, 2, replace=False)] = [0, 1]
        s = np.round(rng.random(n), 2)
        t = gmean_threshold(s, y)
        mismatches += (t.threshold, t.sensitivity, t.specificity) != gmean_scan(s.tolist(), y.tolist())
    ok = criterion(3, "G-mean threshold vs exhaustive search", mismatches == 0, f"{mismatches}/200 mismatches")
    assert ok


def test_c04_knn_oracle(criterion):
    rng = np.random.default_rng(4)
    mismatches = 0
    for _ in range(50):
        n = int(rng.integers(4, 201))
        x = rng.normal(size=(n, 4))
        y = rng.integers(0, 2, n)
        mismatches += not np.array_equal(knn_label_means(x, y, 3), knn_means_bruteforce(x.tolist(), y.tolist(), 3))
    example = knn_label_means(np.array([[0.0], [1.0], [2.0], [3.0], [10.0]]), np.array([0, 1, 1, 0, 1]), 3)[0]
    ok = criterion(4, "k-NN label means vs O(n^2) oracle", mismatches == 0 and math.isclose(example, 2 / 3),
                   f"{mismatches}/50 mismatches, worked example {example:.6f}")
    assert ok


def test_c05_gradient_check(criterion):
    errors = {name: smooth_point(case, 0) for name, case in CASES.items()}
    worst = max(errors.values())
    detail = ", ".join(f"{k} {v:.1e}" for k, v in errors.items())
    ok = criterion(5, "gradients vs central differences (h=1e-3)", worst < 1e-3, f"max rel err {worst:.1e} ({detail})")
    assert ok


def test_c06_lrp_conservation(criterion):
    worst = float(conservation_errors(n=100, seed=6).max())
    ok = criterion(6, "LRP zero-rule conservation", worst < 1e-4, f"max |sum R - logit|/|logit| = {worst:.1e}")
    assert ok


def _report(model, test):
    return evaluate_scores(model.scores(test), test.labels, task=model.task, d=model.rep.dim,
                           n_train=0, seed=0).to_dict(None)


def test_c07_roundtrip_split_determinism(criterion, tmp_path):
    recs = synth_corpus(6, 6, SynthParams(duration_s=20), seed=70)
    write_corpus(recs, tmp_path / "c")
    back = load_records(read_manifest(tmp_path / "c"))
    bit_exact = all(a.samples.tobytes() == b.samples.tobytes() for a, b in zip(recs, back))

    segs = segment_records(back)
    train, test = split(segs, SplitSpec(n_per_class=4, seed=1))
    pool, held = split_records(segs, 0.3, seed=1)
    leak_free = not (set(train.source_ids) & set(test.source_ids)) and not (set(pool.source_ids) & set(held.source_ids))

    tiny = EncoderConfig(stages=2, base_width=2, blocks_per_stage=1, kernel=5, rep_dim=64, stem_stride=4)
    ft = FinetuneConfig(epochs=2, batch=8, seed=2)

    def pipelines():
        out = {}
        for task in ("ts", "temporal", "spatial", "simclr", "ae"):
            rep = pretrain(train.samples, PretrainConfig(task=task, encoder=tiny, epochs=1, batch=8, seed=2))
            out[task] = _report(finetune(rep, train, config=ft), test)
        out["rp"] = _report(finetune(fit_rp(16, 2), train, config=FinetuneConfig(mode="linear", seed=2)), test)
        out["pca"] = _report(finetune(fit_pca(train, 4), train, config=FinetuneConfig(mode="linear", seed=2)), test)
        out["scratch"] = _report(train_from_scratch(train, encoder_config=tiny, config=ft), test)
        return out

    first, second = pipelines(), pipelines()
    same = [k for k in first if first[k] == second[k]]
    ok = criterion(7, "ingest round-trip, split leakage, rerun determinism", bit_exact and leak_free and
                   len(same) == len(first),
                   f"bit-exact {bit_exact}, leak-free {leak_free}, identical reruns {len(same)}/{len(first)} pipelines")
    assert ok


def test_c08_ntxent_closed_form(criterion):
    devs = {}
    for n in (2, 4, 8):
        loss = ntxent_loss(torch.ones(2 * n, 5, dtype=torch.float64), ntxent_pairing(n)).item()
        devs[n] = abs(loss - math.log(2 * n - 1))
    worst = max(devs.values())
    ok = criterion(8, "NT-Xent identical representations = ln(2N-1)", worst < 1e-5, f"max deviation {worst:.1e}")
    assert ok


# ------------------------------------------------------------------ learning criteria

@pytest.fixture(scope="module")
def bench():
    torch.set_num_threads(1)
    t0 = time.perf_counter()
    runs = [run_benchmark(s, BenchmarkConfig()) for s in SEEDS]
    elapsed = time.perf_counter() - t0
    return runs, median_summary(runs), elapsed


def _per_seed(runs, key):
    return "/".join(f"{r[key]:.3f}" for r in runs)


def test_c09_pretext_learnability(criterion, bench):
    runs, med, elapsed = bench
    acc, epochs = med["ts_pretext_accuracy"], max(r["ts_pretext_epochs"] for r in runs)
    ok = criterion(9, "T-S pretext learnability", acc > 0.9 and epochs <= 30 and runs[0]["n_pretrain"] == 2000,
                   f"median held-out accuracy {acc:.3f} within {epochs} epochs on {runs[0]['n_pretrain']} segments "
                   f"(seeds {_per_seed(runs, 'ts_pretext_accuracy')}; learning block {elapsed:.0f}s of "
                   f"{LEARNING_BUDGET_S}s budget)")
    assert ok


def test_c10_downstream_benefit(criterion, bench):
    runs, med, _ = bench
    ts, scratch = med["auc_ts_small"], med["auc_scratch_small"]
    ok = criterion(10, "50-segment transfer vs scratch", ts >= scratch + 0.05 and ts >= 0.80 and
                   runs[0]["n_test"] == 500 and runs[0]["n_small"] == 50,
                   f"median AUC T-S {ts:.3f} vs scratch {scratch:.3f} (margin {ts - scratch:+.3f}); "
                   f"T-S {_per_seed(runs, 'auc_ts_small')}, scratch {_per_seed(runs, 'auc_scratch_small')}")
    assert ok


def test_c11_baseline_ordering(criterion, bench):
    runs, med, _ = bench
    ts, tmp, sp, rp = (med[f"auc_{k}_large"] for k in ("ts", "temporal", "spatial", "rp"))
    ok = criterion(11, "200-segment ordering T-S >= Temporal > Spatial, T-S > RP",
                   ts >= tmp > sp and ts > rp,
                   f"median AUC T-S {ts:.3f}, Temporal {tmp:.3f}, Spatial {sp:.3f}, RP {rp:.3f}; margins "
                   f"T-S-Temporal {ts - tmp:+.3f}, Temporal-Spatial {tmp - sp:+.3f}, T-S-RP {ts - rp:+.3f}")
    assert ok


def test_c12_neighbor_study(criterion, bench):
    runs, med, _ = bench
    p = med["neighbor_p"]
    ok = criterion(12, "neighbour-label Welch test on T-S representations", p < 0.01,
                   f"median one-sided p {p:.2e} on 200+200 segments (seeds "
                   + "/".join(f"{r['neighbor_p']:.1e}" for r in runs) + ")")
    assert ok
