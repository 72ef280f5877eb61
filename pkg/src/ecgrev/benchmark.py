"""Desk-scale synthetic benchmark: pretext learnability, downstream transfer, baseline ordering, neighbours."""

from __future__ import annotations

import logging
import time
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .evaluation import auc, neighbor_study
from .ingest import SplitSpec, split
from .nn.encoder import EncoderConfig
from .pipelines import FinetuneConfig, PretrainConfig, fit_rp, finetune, pretrain, sub_seed, train_from_scratch
from .signal import SegmentSet, segment_records
from .synth import preset, synth_corpus

log = logging.getLogger(__name__)

# Small enough to train on one CPU in well under a minute per task.
DESK_ENCODER = EncoderConfig(stages=3, base_width=8, blocks_per_stage=1, kernel=7, rep_dim=128, stem_stride=4)


@dataclass(frozen=True)
class BenchmarkConfig:
    preset: str = "hard"
    pretrain_records: int = 200  # per class; 5 windows each -> 2000 segments
    pool_records: int = 100
    test_records: int = 50  # per class -> 500 test segments
    encoder: EncoderConfig = DESK_ENCODER
    pretrain_epochs: int = 3
    # small-sample arms: each gets the setting that worked best for it on separate tuning seeds
    finetune: FinetuneConfig = field(default_factory=lambda: FinetuneConfig(mode="full", lr=1e-2, batch=16))
    scratch: FinetuneConfig = field(default_factory=lambda: FinetuneConfig(mode="full", lr=3e-3, batch=16))
    # representation comparison: identical frozen-feature probe for every method
    probe: FinetuneConfig = field(default_factory=lambda: FinetuneConfig(mode="linear"))
    small_n: int = 50
    large_n: int = 200
    neighbor_per_class: int = 200

    def to_dict(self) -> dict:
        d = asdict(self)
        d["encoder"] = self.encoder.to_dict()
        return d


@dataclass
class BenchmarkData:
    pretrain: SegmentSet
    pool: SegmentSet
    test: SegmentSet


def make_data(seed: int, config: BenchmarkConfig) -> BenchmarkData:
    params = preset(config.preset)

    def corpus(name, n):
        return segment_records(synth_corpus(n, n, params, seed=sub_seed(seed, name)))

    return BenchmarkData(corpus("pretrain", config.pretrain_records),
                         corpus("pool", config.pool_records),
                         corpus("test", config.test_records))


def run_benchmark(seed: int, config: BenchmarkConfig = BenchmarkConfig()) -> dict:
    """One seed of the full protocol. Returns a flat dict of measured quantities."""
    data = make_data(seed, config)
    ft = replace(config.finetune, seed=seed)
    probe = replace(config.probe, seed=seed)
    small, _ = split(data.pool, SplitSpec(n_per_class=config.small_n // 2, seed=seed))
    large, _ = split(data.pool, SplitSpec(n_per_class=config.large_n // 2, seed=seed))
    test = data.test
    out: dict = {"seed": seed, "n_pretrain": len(data.pretrain), "n_test": len(test),
                 "n_small": len(small), "n_large": len(large)}
    t0 = time.perf_counter()

    reps = {}
    for task in ("ts", "temporal", "spatial"):
        cfg = PretrainConfig(task=task, encoder=config.encoder, epochs=config.pretrain_epochs, seed=seed)
        reps[task] = pretrain(data.pretrain.samples, cfg)
        log.info("seed %d: pretrained %s in %.0fs", seed, task, time.perf_counter() - t0)
    accs = [h["pretext_accuracy"] for h in reps["ts"].log]
    out["ts_pretext_accuracy"] = max(accs)
    out["ts_pretext_epochs"] = len(accs)

    out["auc_ts_small"] = auc(finetune(reps["ts"], small, config=ft).scores(test), test.labels)
    scratch = train_from_scratch(small, encoder_config=config.encoder, config=replace(config.scratch, seed=seed))
    out["auc_scratch_small"] = auc(scratch.scores(test), test.labels)

    reps["rp"] = fit_rp(config.encoder.rep_dim, sub_seed(seed, "rp"))
    for task, rep in reps.items():
        out[f"auc_{task}_large"] = auc(finetune(rep, large, config=probe).scores(test), test.labels)

    rng = np.random.default_rng(sub_seed(seed, "neighbors"))
    idx = np.concatenate([rng.choice(np.flatnonzero(test.labels == c), config.neighbor_per_class, replace=False)
                          for c in (0, 1)])
    study = neighbor_study(reps["ts"].embed(test.take(idx)), test.labels[idx])
    out["neighbor_t"] = study.test.t
    out["neighbor_p"] = study.test.p
    out["seconds"] = time.perf_counter() - t0
    return out


def median_summary(runs: list[dict]) -> dict:
    keys = [k for k in runs[0] if k != "seed" and isinstance(runs[0][k], (int, float))]
    return {k: float(np.median([r[k] for r in runs])) for k in keys}
