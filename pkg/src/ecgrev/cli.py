"""Command-line front end: ``ecgrev <command> ...``.

Exit codes: 0 success, 1 usage / contradictory flags, 2 data or file error,
3 numeric failure during training.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from dataclasses import replace
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
import torch

from . import __version__
from .evaluation import SCHEMA_VERSION, evaluate_scores, neighbor_study, project_2d
from .ingest import IngestError, InsufficientDataError, SplitSpec, load_records, read_manifest, split, split_records, \
    write_corpus
from .interpret import DEFAULT_EPSILON, heatmap_export, lrp, peak_focus
from .models import DownstreamModel, EncoderRep, checkpoint_extra, load_model, save_model
from .nn.checkpoint import CheckpointError
from .nn.encoder import EncoderConfig
from .pipelines import (FinetuneConfig, NumericError, PretrainConfig, Task, fit_pca, fit_rp, finetune, pretrain,
                        train_from_scratch)
from .signal import SegmentSet, segment_records
from .synth import PRESETS, preset, synth_corpus

log = logging.getLogger("ecgrev")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3
ENCODER_TASKS = ("ts", "temporal", "spatial", "simclr", "ae")
SWEEP_TASKS = ENCODER_TASKS + ("rp", "pca", "scratch")
SUMMARY_HEADER = ["task", "dim", "n_train", "seed", "auc", "sens", "spec", "acc"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _timestamp() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _csv_ints(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _csv_words(text: str) -> list[str]:
    return [v.strip() for v in text.split(",") if v.strip()]


# ---------------------------------------------------------------- io helpers

def _echo_path(out: Path) -> Path:
    return out / "config.json" if out.suffix == "" else out.with_name(out.name + ".config.json")


def _echo(out: Path, args: argparse.Namespace) -> None:
    """Write the resolved flags so ``ecgrev replay`` can rerun the command."""
    flags = {k: v for k, v in vars(args).items() if k not in ("func", "verbose")}
    payload = {"schema_version": SCHEMA_VERSION, "ecgrev_version": __version__, "command": args.command,
               "args": flags}
    path = _echo_path(out)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True, default=str) + "\n")


def _load_segments(data: str, need_labels: bool = False) -> SegmentSet:
    manifest = read_manifest(data)
    segs = segment_records(load_records(manifest))
    if len(segs) == 0:
        raise InsufficientDataError(f"{data}: no usable 10 s segments")
    if need_labels and segs.labels is None:
        raise InsufficientDataError(f"{data}: every record needs a Normal or AF label here")
    return segs


def _prepare_out(path: str) -> Path:
    out = Path(path)
    parent = out if out.suffix == "" else out.parent
    try:
        parent.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IngestError(f"cannot create {parent}: {exc}") from exc
    return out


def _encoder_config(args) -> EncoderConfig:
    return EncoderConfig(stages=args.stages, base_width=args.width, blocks_per_stage=args.blocks,
                         kernel=args.kernel, rep_dim=args.dim, stem_stride=args.stem_stride)


def _finetune_config(args, mode: str) -> FinetuneConfig:
    return FinetuneConfig(mode=mode, epochs=args.ft_epochs, batch=args.ft_batch, lr=args.ft_lr,
                          encoder_lr_scale=args.encoder_lr_scale, seed=args.seed)


def _pick_train(segs: SegmentSet, n: int, balanced: bool, seed: int) -> SegmentSet:
    if balanced and n % 2:
        raise UsageError("--balanced needs an even --n-train")
    spec = SplitSpec(n_per_class=n // 2, seed=seed) if balanced else SplitSpec(n_train=n, seed=seed)
    return split(segs, spec)[0]


def _write_history(history: list[dict], out: Path, title: str) -> None:
    from .plotting import training_curve

    if not history:
        return
    with open(out.with_suffix(".log.csv"), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["epoch", "loss", "pretext_accuracy"])
        for h in history:
            w.writerow([h["epoch"], f"{h['loss']:.9g}", f"{h.get('pretext_accuracy', float('nan')):.9g}"])
    training_curve(history, out.with_suffix(".curve.png"), title)


def _load(path: str):
    if not Path(path).is_file():
        raise FileNotFoundError(f"checkpoint not found: {path}")
    return load_model(path)


# ---------------------------------------------------------------- commands

def cmd_synth(args) -> None:
    out = _prepare_out(args.out)
    params = preset(args.preset, duration_s=args.duration)
    records = synth_corpus(args.normal, args.af, params, seed=args.seed)
    write_corpus(records, out, fmt=args.format)
    _echo(out, args)
    print(f"wrote {len(records)} records to {out}")


def cmd_pretrain(args) -> None:
    out = _prepare_out(args.out)
    segs = _load_segments(args.data)
    cfg = PretrainConfig(task=args.task, encoder=_encoder_config(args), epochs=args.epochs, batch=args.batch,
                         lr=args.lr, seed=args.seed, head=args.head)
    rep = pretrain(segs.samples, cfg)
    save_model(rep, out, extra={"pretrain": cfg.to_dict(), "n_pretrain": len(segs)})
    _write_history(rep.log, out, f"{args.task} pretraining")
    _echo(out, args)
    last = rep.log[-1] if rep.log else {}
    print(f"pretrained {args.task} encoder on {len(segs)} segments -> {out} "
          f"(final loss {last.get('loss', float('nan')):.4f})")


def cmd_baseline(args) -> None:
    out = _prepare_out(args.out)
    if args.method == "rp":
        rep = fit_rp(args.dim, args.seed)
        n = 0
    else:
        if not args.data:
            raise UsageError("pca needs --data")
        segs = _load_segments(args.data)
        rep = fit_pca(segs, args.dim)
        n = len(segs)
    save_model(rep, out, extra={"method": args.method, "d": args.dim, "seed": args.seed, "n_fit": n})
    _echo(out, args)
    print(f"fitted {args.method} (d={args.dim}) -> {out}")


def cmd_finetune(args) -> None:
    out = _prepare_out(args.out)
    model = _load(args.model)
    if isinstance(model, DownstreamModel):
        raise UsageError(f"{args.model} is already fine-tuned; pass a representation checkpoint")
    mode = args.mode or ("full" if isinstance(model, EncoderRep) else "linear")
    if mode == "full" and not isinstance(model, EncoderRep):
        raise UsageError(f"--mode full needs an encoder checkpoint, {args.model} holds {model.kind}")
    segs = _load_segments(args.data, need_labels=True)
    train = _pick_train(segs, args.n_train, args.balanced, args.seed)
    cfg = _finetune_config(args, mode)
    ft = finetune(model, train, config=cfg)
    task = model.task if isinstance(model, EncoderRep) else model.kind
    save_model(ft, out, extra={"task": task, "d": model.dim, "n_train": len(train), "seed": args.seed,
                               "finetune": cfg.to_dict()})
    _echo(out, args)
    print(f"fine-tuned ({mode}) on {len(train)} segments -> {out}")


def cmd_scratch(args) -> None:
    out = _prepare_out(args.out)
    segs = _load_segments(args.data, need_labels=True)
    train = _pick_train(segs, args.n_train, args.balanced, args.seed)
    cfg = _finetune_config(args, "full")
    model = train_from_scratch(train, encoder_config=_encoder_config(args), config=cfg)
    save_model(model, out, extra={"task": "scratch", "d": args.dim, "n_train": len(train), "seed": args.seed,
                                  "finetune": cfg.to_dict()})
    _echo(out, args)
    print(f"trained from scratch on {len(train)} segments -> {out}")


def cmd_evaluate(args) -> None:
    from .plotting import roc_curve

    report_path = _prepare_out(args.report)
    model = _load(args.model)
    if not isinstance(model, DownstreamModel):
        raise UsageError(f"{args.model} has no classifier head; run finetune first")
    extra = checkpoint_extra(args.model)
    segs = _load_segments(args.data, need_labels=True)
    scores = model.scores(segs)
    rep = evaluate_scores(scores, segs.labels, task=extra.get("task", model.task), d=int(extra.get("d", 0)),
                          n_train=int(extra.get("n_train", 0)), seed=int(extra.get("seed", 0)))
    rep.extra = {"n_test": len(segs), "mode": model.mode}
    rep.write_json(report_path, _timestamp())
    if args.scores:
        with open(args.scores, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["id", "label", "score"])
            for sid, y, s in zip(segs.ids, segs.labels.tolist(), scores.tolist()):
                w.writerow([sid, y, f"{s:.9g}"])
    roc_curve(scores, segs.labels, report_path.with_suffix(".roc.png"), rep.auc, rep.threshold)
    _echo(report_path, args)
    print(f"AUC {rep.auc:.4f}  sens {rep.sensitivity:.4f}  spec {rep.specificity:.4f}  acc {rep.accuracy:.4f}")


def cmd_sweep(args) -> None:
    from .plotting import auc_vs_n

    out = _prepare_out(args.out)
    unknown = sorted(set(args.tasks) - set(SWEEP_TASKS))
    if unknown:
        raise UsageError(f"unknown task(s) {unknown}; choose from {list(SWEEP_TASKS)}")
    if args.balanced and any(n % 2 for n in args.n_train):
        raise UsageError("--balanced needs even --n-train values")
    segs = _load_segments(args.data, need_labels=True)
    test_fixed = _load_segments(args.test_data, need_labels=True) if args.test_data else None
    _echo(out, args)
    rows = []
    for seed in range(args.seeds):
        if test_fixed is None:
            pool, test = split_records(segs, args.test_fraction, seed)
        else:
            pool, test = segs, test_fixed
        for task in args.tasks:
            for dim in args.dims:
                enc_cfg = replace(_encoder_config(args), rep_dim=dim) if task not in ("rp", "pca") else None
                rep = None
                if task in ENCODER_TASKS:
                    rep = pretrain(pool.samples, PretrainConfig(task=task, encoder=enc_cfg, epochs=args.epochs,
                                                                batch=args.batch, lr=args.lr, seed=seed))
                elif task == "rp":
                    rep = fit_rp(dim, seed)
                elif task == "pca":
                    rep = fit_pca(pool, dim)
                for n in args.n_train:
                    train = _pick_train(pool, n, args.balanced, seed)
                    sub = argparse.Namespace(**{**vars(args), "seed": seed})
                    if task == "scratch":
                        model = train_from_scratch(train, encoder_config=enc_cfg,
                                                   config=_finetune_config(sub, "full"))
                    else:
                        mode = args.mode if task in ENCODER_TASKS else "linear"
                        model = finetune(rep, train, config=_finetune_config(sub, mode))
                    report = evaluate_scores(model.scores(test), test.labels, task=task, d=dim,
                                             n_train=len(train), seed=seed)
                    report.extra = {"n_test": len(test), "mode": model.mode}
                    cell = out / task / f"d{dim}" / f"n{n}" / f"seed{seed}"
                    cell.mkdir(parents=True, exist_ok=True)
                    report.write_json(cell / "report.json", _timestamp())
                    rows.append({"task": task, "dim": dim, "n_train": n, "seed": seed, "auc": report.auc,
                                 "sens": report.sensitivity, "spec": report.specificity, "acc": report.accuracy})
                    log.info("%s d=%d n=%d seed=%d AUC %.4f", task, dim, n, seed, report.auc)
    with open(out / "summary.csv", "w", newline="") as fh:
        w = csv.DictWriter(fh, SUMMARY_HEADER, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: (f"{v:.6f}" if isinstance(v, float) else v) for k, v in r.items()})
    auc_vs_n(rows, out / "auc_vs_n.png")
    print(f"{len(rows)} cells -> {out / 'summary.csv'}")


def _resolve_ids(segs: SegmentSet, wanted: list[str]) -> list[int]:
    index = {sid: i for i, sid in enumerate(segs.ids)}
    first: dict[str, int] = {}
    for i, src in enumerate(segs.source_ids):
        first.setdefault(src, i)
    picked = []
    for w in wanted:
        i = index.get(w, first.get(w))
        if i is None:
            raise InsufficientDataError(f"no segment with id {w!r} (use a record id or record@offset)")
        picked.append(i)
    return picked


def cmd_interpret(args) -> None:
    from .plotting import relevance_trace

    out = _prepare_out(args.out)
    out.mkdir(parents=True, exist_ok=True)
    model = _load(args.model)
    if not isinstance(model, DownstreamModel):
        raise UsageError(f"{args.model} has no classifier head; run finetune first")
    manifest = read_manifest(args.data)
    records = load_records(manifest)
    segs = segment_records(records)
    peaks = {r.id: r.annotations for r in records}
    fs_of = {r.id: r.fs for r in records}
    rows = []
    for i in _resolve_ids(segs, args.ids):
        sid = segs.ids[i]
        rmap = lrp(model, segs.samples[i], segment_id=sid, rule=args.rule, epsilon=args.epsilon)
        stem = out / sid.replace("@", "_")
        heatmap_export(rmap, stem.with_suffix(".csv"), svg_path=stem.with_suffix(".svg"))
        fs = fs_of[segs.source_ids[i]]
        relevance_trace(rmap.samples, rmap.scores, stem.with_suffix(".png"), fs=fs, title=sid)
        row = {"id": sid, "logit": rmap.output_logit, "sum_R": float(rmap.scores.sum()), "residual": rmap.residual}
        ann = peaks.get(segs.source_ids[i])
        if ann is not None:
            start = int(segs.offsets[i])
            local = np.round(ann * fs).astype(np.int64) - start
            local = local[(local >= 0) & (local < rmap.scores.size)]
            row.update(peak_focus(rmap.scores, local, fs))
        rows.append(row)
    keys = list(dict.fromkeys(k for r in rows for k in r))
    with open(out / "summary.csv", "w", newline="") as fh:
        w = csv.DictWriter(fh, keys, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: (f"{v:.9g}" if isinstance(v, float) else v) for k, v in r.items()})
    _echo(out, args)
    print(f"relevance maps for {len(rows)} segment(s) -> {out}")


def _rep_of(model):
    return model.rep if isinstance(model, DownstreamModel) else model


def cmd_neighbors(args) -> None:
    from .plotting import neighbor_hist

    report = _prepare_out(args.report)
    rep = _rep_of(_load(args.model))
    segs = _load_segments(args.data, need_labels=True)
    study = neighbor_study(rep.embed(segs), segs.labels, k=args.k)
    payload = study.to_dict(_timestamp())
    report.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    neighbor_hist(study.means, study.labels, report.with_suffix(".png"))
    _echo(report, args)
    print(f"mean neighbour label AF {payload['mean_af']:.3f} vs Normal {payload['mean_normal']:.3f}, "
          f"p = {payload['p']:.3g}")


def cmd_project2d(args) -> None:
    from .plotting import projection_scatter

    out = _prepare_out(args.out)
    rep = _rep_of(_load(args.model))
    records = load_records(read_manifest(args.data))
    segs = segment_records(records)
    if len(segs) < 2:
        raise InsufficientDataError("need at least 2 segments to project")
    label_of = {r.id: r.label.value for r in records}
    names = [label_of[s] for s in segs.source_ids]
    pts = project_2d(rep.embed(segs))
    with open(out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", "label", "x", "y"])
        for sid, lab, (x, y) in zip(segs.ids, names, pts.tolist()):
            w.writerow([sid, lab, f"{x:.9g}", f"{y:.9g}"])
    projection_scatter(pts, names, out.with_suffix(".png"))
    _echo(out, args)
    print(f"projected {len(segs)} segments -> {out}")


def cmd_benchmark(args) -> None:
    from .benchmark import BenchmarkConfig, median_summary, run_benchmark

    out = _prepare_out(args.out)
    out.mkdir(parents=True, exist_ok=True)
    cfg = BenchmarkConfig(preset=args.preset)
    runs = [run_benchmark(s, cfg) for s in range(args.seeds)]
    payload = {"schema_version": SCHEMA_VERSION, "config": cfg.to_dict(), "runs": runs,
               "median": median_summary(runs), "timestamp": _timestamp()}
    (out / "benchmark.json").write_text(json.dumps(payload, indent=2, sort_keys=True, default=str) + "\n")
    _echo(out, args)
    for k, v in payload["median"].items():
        print(f"{k:24s} {v:.6g}")


def cmd_replay(args) -> None:
    try:
        echo = json.loads(Path(args.config).read_text())
        command, flags = echo["command"], echo["args"]
    except (OSError, ValueError, KeyError) as exc:
        raise IngestError(f"{args.config}: not a config echo ({exc})") from None
    if command not in COMMANDS or command == "replay":
        raise UsageError(f"{args.config}: cannot replay command {command!r}")
    COMMANDS[command](argparse.Namespace(**{**flags, "command": command}))


# ---------------------------------------------------------------- parser

def _add_encoder_flags(p, dim=True):
    if dim:
        p.add_argument("--dim", type=int, default=128, help="representation size d")
    p.add_argument("--stages", type=int, default=4)
    p.add_argument("--width", type=int, default=16, help="channels of the first stage")
    p.add_argument("--blocks", type=int, default=2, help="residual blocks per stage")
    p.add_argument("--kernel", type=int, default=7)
    p.add_argument("--stem-stride", type=int, default=1)


def _add_finetune_flags(p):
    p.add_argument("--ft-epochs", type=int, default=50)
    p.add_argument("--ft-batch", type=int, default=64)
    p.add_argument("--ft-lr", type=float, default=1e-3)
    p.add_argument("--encoder-lr-scale", type=float, default=0.1)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ecgrev", description="ECG reverse-detection representation learning")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("synth", help="generate a labeled synthetic corpus")
    p.add_argument("--normal", type=int, required=True)
    p.add_argument("--af", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--preset", choices=sorted(PRESETS), default="clean")
    p.add_argument("--duration", type=float, default=30.0, help="record length in seconds")
    p.add_argument("--format", choices=["f32le", "txt"], default="f32le")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("pretrain", help="self-supervised encoder pretraining")
    p.add_argument("--task", choices=[t.value for t in Task], default="ts")
    p.add_argument("--data", required=True)
    p.add_argument("--epochs", type=int, default=30)
    p.add_argument("--batch", type=int, default=64)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--head", choices=["bits", "softmax"], default="bits")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    _add_encoder_flags(p)
    p.set_defaults(func=cmd_pretrain)

    p = sub.add_parser("baseline", help="fit a random-projection or PCA representation")
    p.add_argument("--method", choices=["rp", "pca"], required=True)
    p.add_argument("--dim", type=int, default=128)
    p.add_argument("--data")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("finetune", help="train a classifier head (and optionally the encoder)")
    p.add_argument("--model", required=True)
    p.add_argument("--mode", choices=["linear", "full"])
    p.add_argument("--n-train", type=int, required=True)
    p.add_argument("--balanced", action="store_true", help="equal Normal/AF counts")
    p.add_argument("--data", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    _add_finetune_flags(p)
    p.set_defaults(func=cmd_finetune)

    p = sub.add_parser("scratch", help="supervised training of a fresh encoder")
    p.add_argument("--n-train", type=int, required=True)
    p.add_argument("--balanced", action="store_true")
    p.add_argument("--data", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    _add_encoder_flags(p)
    _add_finetune_flags(p)
    p.set_defaults(func=cmd_scratch, encoder_lr_scale=1.0)

    p = sub.add_parser("evaluate", help="AUC and G-mean operating point on labeled data")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--report", required=True)
    p.add_argument("--scores", help="optional per-segment score CSV")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("sweep", help="task x dim x fine-tune-size x seed grid")
    p.add_argument("--tasks", type=_csv_words, default=["ts", "temporal", "spatial", "rp", "pca"])
    p.add_argument("--dims", type=_csv_ints, default=[64, 128, 256])
    p.add_argument("--n-train", type=_csv_ints, default=[50, 100, 200, 500, 1000, 2000])
    p.add_argument("--seeds", type=int, default=5)
    p.add_argument("--data", required=True)
    p.add_argument("--test-data", help="fixed test corpus; otherwise a record-level split of --data")
    p.add_argument("--test-fraction", type=float, default=0.2)
    p.add_argument("--balanced", action="store_true")
    p.add_argument("--mode", choices=["linear", "full"], default="full")
    p.add_argument("--epochs", type=int, default=30)
    p.add_argument("--batch", type=int, default=64)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--out", required=True)
    _add_encoder_flags(p, dim=False)
    _add_finetune_flags(p)
    p.set_defaults(func=cmd_sweep, dim=128, seed=0)

    p = sub.add_parser("interpret", help="LRP relevance heatmaps")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--ids", type=_csv_words, required=True, help="record ids or record@offset")
    p.add_argument("--rule", choices=["epsilon", "zero"], default="epsilon")
    p.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_interpret)

    p = sub.add_parser("neighbors", help="k-NN label means and Welch test")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--report", required=True)
    p.set_defaults(func=cmd_neighbors)

    p = sub.add_parser("project2d", help="2-D PCA coordinates of representations")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_project2d)

    p = sub.add_parser("benchmark", help="desk-scale synthetic benchmark over several seeds")
    p.add_argument("--seeds", type=int, default=3)
    p.add_argument("--preset", choices=sorted(PRESETS), default="hard")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("replay", help="rerun a command from its config.json echo")
    p.add_argument("config")
    p.set_defaults(func=cmd_replay)
    return parser


COMMANDS = {"synth": cmd_synth, "pretrain": cmd_pretrain, "baseline": cmd_baseline, "finetune": cmd_finetune,
            "scratch": cmd_scratch, "evaluate": cmd_evaluate, "sweep": cmd_sweep, "interpret": cmd_interpret,
            "neighbors": cmd_neighbors, "project2d": cmd_project2d, "benchmark": cmd_benchmark,
            "replay": cmd_replay}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    torch.set_num_threads(1)
    try:
        args.func(args)
    except UsageError as exc:
        print(f"ecgrev {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericError as exc:
        print(f"ecgrev {args.command}: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (IngestError, CheckpointError, OSError, ValueError, KeyError) as exc:
        print(f"ecgrev {args.command}: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
