"""Stage one (representation learning and baselines) and stage two (AF detection heads).

Pretraining functions take bare ``[n, length]`` arrays, so downstream labels can
never reach them.
"""

from __future__ import annotations

import logging
import zlib
from dataclasses import asdict, dataclass, field, replace
from enum import Enum

import numpy as np
import torch

from .models import (DownstreamModel, EncoderRep, PCAProjection, RandomProjection, RepModel, clone_rep,
                     fresh_encoder, fresh_head)
from .nn.encoder import Decoder, EncoderConfig
from .nn.losses import bce_multilabel_loss, ntxent_loss, ntxent_pairing, reconstruction_loss, softmax_ce_loss
from .nn.optim import Optimizer
from .signal import SEGMENT_LENGTH
from .transforms import AugmentKind, AugmentSpec, PretextMode, augment, make_pretext_set

log = logging.getLogger(__name__)


class NumericError(RuntimeError):
    pass


class Task(str, Enum):
    TS = "ts"
    TEMPORAL = "temporal"
    SPATIAL = "spatial"
    SIMCLR = "simclr"
    AE = "ae"


def sub_seed(seed: int, name: str) -> int:
    """Independent named stream derived from one run seed."""
    ss = np.random.SeedSequence([int(seed) & 0xFFFFFFFF, zlib.crc32(name.encode())])
    return int(ss.generate_state(1, dtype=np.uint32)[0])


@dataclass(frozen=True)
class PretrainConfig:
    task: Task = Task.TS
    encoder: EncoderConfig = field(default_factory=EncoderConfig)
    epochs: int = 30
    batch: int = 64
    lr: float = 1e-3
    seed: int = 0
    head: str = "bits"  # "bits" (two sigmoid flags) or "softmax" (4-way), TS task only
    val_fraction: float = 0.1
    augment_a: AugmentSpec = field(default_factory=lambda: AugmentSpec(AugmentKind.PERMUTATION))
    augment_b: AugmentSpec = field(default_factory=lambda: AugmentSpec(AugmentKind.GAUSSIAN_NOISE))
    tau: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "task", Task(self.task))
        if self.epochs < 0 or self.batch <= 0 or self.lr <= 0:
            raise ValueError("epochs must be >= 0, batch and lr positive")
        if self.head not in ("bits", "softmax"):
            raise ValueError("head must be 'bits' or 'softmax'")
        if not 0.0 <= self.val_fraction < 1.0:
            raise ValueError("val_fraction must lie in [0, 1)")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["task"] = self.task.value
        for k in ("augment_a", "augment_b"):
            d[k]["kind"] = getattr(self, k).kind.value
        return d


@dataclass(frozen=True)
class FinetuneConfig:
    mode: str = "full"  # "full" or "linear"
    epochs: int = 50
    batch: int = 64
    lr: float = 1e-3
    encoder_lr_scale: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.mode not in ("full", "linear"):
            raise ValueError("mode must be 'full' or 'linear'")
        if self.epochs < 0 or self.batch <= 0 or self.lr <= 0:
            raise ValueError("epochs must be >= 0, batch and lr positive")

    def to_dict(self) -> dict:
        return asdict(self)


def _check_unlabeled(segments) -> np.ndarray:
    if not isinstance(segments, np.ndarray):
        raise TypeError("pretraining takes a bare [n, length] array of segments, not labeled data")
    x = np.asarray(segments, dtype=np.float32)
    if x.ndim != 2 or x.shape[0] == 0:
        raise ValueError("pretraining needs a non-empty [n, length] array")
    if np.any(x.max(axis=1) == x.min(axis=1)):
        raise ValueError("degenerate (constant) segments must be removed before pretraining")
    return x


def _batches(n: int, batch: int, rng: np.random.Generator):
    order = rng.permutation(n)
    for i in range(0, n, batch):
        yield order[i:i + batch]


def _finite(loss: torch.Tensor, where: str):
    if not torch.isfinite(loss):
        raise NumericError(f"non-finite loss during {where}")


def _pretext_targets(y: np.ndarray, task: Task, head: str):
    if task is Task.TS and head == "softmax":
        return torch.from_numpy((2 * y[:, 0] + y[:, 1]).astype(np.int64))
    t = torch.from_numpy(y.astype(np.float32))
    return t if t.dim() == 2 else t[:, None]


def _pretext_loss(logits, targets, task, head):
    if task is Task.TS and head == "softmax":
        return softmax_ce_loss(logits, targets)
    return bce_multilabel_loss(logits, targets)


@torch.no_grad()
def _pretext_accuracy(encoder, head, x, targets, task, head_kind, batch=256) -> float:
    if x.shape[0] == 0:
        return float("nan")
    encoder.eval()
    correct = 0
    for i in range(0, x.shape[0], batch):
        lg = head(encoder(torch.from_numpy(x[i:i + batch])))
        t = targets[i:i + batch]
        if task is Task.TS and head_kind == "softmax":
            correct += int((lg.argmax(dim=1) == t).sum())
        else:
            correct += int(((lg > 0).float() == t).all(dim=1).sum())
    return correct / x.shape[0]


def pretrain(segments: np.ndarray, config: PretrainConfig = PretrainConfig()) -> EncoderRep:
    """Train an encoder on a self-supervised task and return it without its head.

    For the reverse-detection tasks the pretext examples of a random
    ``val_fraction`` of the source segments are held out and scored each epoch.
    """
    if config.task is Task.SIMCLR:
        return train_simclr(segments, config)
    if config.task is Task.AE:
        return train_autoencoder(segments, config)
    x = _check_unlabeled(segments)
    mode = {Task.TS: PretextMode.TS, Task.TEMPORAL: PretextMode.TEMPORAL_ONLY,
            Task.SPATIAL: PretextMode.SPATIAL_ONLY}[config.task]
    encoder = fresh_encoder(config.encoder, sub_seed(config.seed, "init"))
    if config.epochs == 0:
        return EncoderRep(encoder, config.task.value, [])

    split_rng = np.random.default_rng(sub_seed(config.seed, "pretext-split"))
    perm = split_rng.permutation(x.shape[0])
    n_val = int(round(config.val_fraction * x.shape[0]))
    x_tr, y_tr = make_pretext_set(x[perm[n_val:]], mode)
    x_va, y_va = make_pretext_set(x[perm[:n_val]], mode)
    t_tr = _pretext_targets(y_tr, config.task, config.head)
    t_va = _pretext_targets(y_va, config.task, config.head)

    k = (4 if config.head == "softmax" else 2) if config.task is Task.TS else 1
    head = fresh_head(config.encoder.rep_dim, sub_seed(config.seed, "pretext-head"), k)
    opt = Optimizer([*encoder.parameters(), *head.parameters()], lr=config.lr)
    rng = np.random.default_rng(sub_seed(config.seed, "shuffle"))
    history = []
    for epoch in range(1, config.epochs + 1):
        encoder.train()
        total, count = 0.0, 0
        for idx in _batches(x_tr.shape[0], config.batch, rng):
            opt.zero_grad()
            loss = _pretext_loss(head(encoder(torch.from_numpy(x_tr[idx]))), t_tr[idx], config.task, config.head)
            _finite(loss, f"{config.task.value} pretraining, epoch {epoch}")
            loss.backward()
            opt.step()
            total += loss.item() * len(idx)
            count += len(idx)
        acc = _pretext_accuracy(encoder, head, x_va, t_va, config.task, config.head)
        history.append({"epoch": epoch, "loss": total / count, "pretext_accuracy": acc})
        log.info("pretrain %s epoch %d loss %.4f val-acc %.4f", config.task.value, epoch, total / count, acc)
    encoder.eval()
    return EncoderRep(encoder, config.task.value, history)


def train_simclr(segments: np.ndarray, config: PretrainConfig) -> EncoderRep:
    """Contrastive training: a permuted and a noised view of each segment form the positive pair."""
    x = _check_unlabeled(segments)
    encoder = fresh_encoder(config.encoder, sub_seed(config.seed, "init"))
    if config.epochs == 0:
        return EncoderRep(encoder, Task.SIMCLR.value, [])
    opt = Optimizer(encoder.parameters(), lr=config.lr)
    rng = np.random.default_rng(sub_seed(config.seed, "shuffle"))
    aug_rng = np.random.default_rng(sub_seed(config.seed, "augment"))
    history = []
    for epoch in range(1, config.epochs + 1):
        encoder.train()
        total, count = 0.0, 0
        for idx in _batches(x.shape[0], config.batch, rng):
            if len(idx) < 2:
                continue
            a = augment(x[idx], config.augment_a, aug_rng)
            b = augment(x[idx], config.augment_b, aug_rng)
            opt.zero_grad()
            reps = encoder(torch.from_numpy(np.concatenate([a, b])))
            loss = ntxent_loss(reps, ntxent_pairing(len(idx)), config.tau)
            _finite(loss, f"simclr epoch {epoch}")
            loss.backward()
            opt.step()
            total += loss.item() * len(idx)
            count += len(idx)
        history.append({"epoch": epoch, "loss": total / max(count, 1), "pretext_accuracy": float("nan")})
    encoder.eval()
    return EncoderRep(encoder, Task.SIMCLR.value, history)


def train_autoencoder(segments: np.ndarray, config: PretrainConfig, return_decoder: bool = False):
    """Reconstruction training with a mirrored decoder; the decoder is dropped unless asked for."""
    x = _check_unlabeled(segments)
    encoder = fresh_encoder(config.encoder, sub_seed(config.seed, "init"))
    with torch.random.fork_rng(devices=[]):
        torch.manual_seed(sub_seed(config.seed, "decoder-init"))
        decoder = Decoder(config.encoder, x.shape[1])
    history = []
    if config.epochs:
        opt = Optimizer([*encoder.parameters(), *decoder.parameters()], lr=config.lr)
        rng = np.random.default_rng(sub_seed(config.seed, "shuffle"))
        for epoch in range(1, config.epochs + 1):
            encoder.train()
            total, count = 0.0, 0
            for idx in _batches(x.shape[0], config.batch, rng):
                xb = torch.from_numpy(x[idx])
                opt.zero_grad()
                loss = reconstruction_loss(xb, decoder(encoder(xb)))
                _finite(loss, f"autoencoder epoch {epoch}")
                loss.backward()
                opt.step()
                total += loss.item() * len(idx)
                count += len(idx)
            history.append({"epoch": epoch, "loss": total / count, "pretext_accuracy": float("nan")})
    encoder.eval()
    rep = EncoderRep(encoder, Task.AE.value, history)
    return (rep, decoder) if return_decoder else rep


@torch.no_grad()
def reconstruction_error(rep: EncoderRep, decoder: Decoder, segments: np.ndarray) -> float:
    xb = torch.from_numpy(np.asarray(segments, dtype=np.float32))
    return float(reconstruction_loss(xb, decoder(rep.encoder(xb))))


def fit_linear_autoencoder(x: np.ndarray, d: int, epochs: int = 2000, lr: float = 1e-2, seed: int = 0):
    """Tied-nothing linear autoencoder on centered data; returns ``(encode, decode, mean)`` weights.

    The optimum spans the top-``d`` principal subspace, which is what makes it a
    useful cross-check of :func:`fit_pca`.
    """
    x = np.asarray(x, dtype=np.float64)
    mean = x.mean(axis=0)
    xc = torch.from_numpy(x - mean)
    gen = torch.Generator().manual_seed(seed)
    n_feat = x.shape[1]
    w_enc = (torch.randn(d, n_feat, generator=gen, dtype=torch.float64) / np.sqrt(n_feat)).requires_grad_()
    w_dec = (torch.randn(n_feat, d, generator=gen, dtype=torch.float64) / np.sqrt(d)).requires_grad_()
    opt = Optimizer([w_enc, w_dec], lr=lr)
    for _ in range(epochs):
        opt.zero_grad()
        loss = ((xc @ w_enc.T @ w_dec.T - xc) ** 2).sum(dim=1).mean()
        loss.backward()
        opt.step()
    return w_enc.detach().numpy(), w_dec.detach().numpy(), mean


def fit_rp(d: int, seed: int, length: int = SEGMENT_LENGTH) -> RandomProjection:
    """Gaussian random projection with entries ~ N(0, 1/d)."""
    if d <= 0:
        raise ValueError("d must be positive")
    rng = np.random.default_rng(seed)
    return RandomProjection(rng.normal(0.0, np.sqrt(1.0 / d), size=(d, length)))


class RankError(ValueError):
    def __init__(self, requested, rank):
        super().__init__(f"requested {requested} components but the data has rank {rank}; "
                         f"achievable d <= {rank}")
        self.rank = rank


def fit_pca(segments, d: int) -> PCAProjection:
    """Top-``d`` right singular vectors of the centered data, by decreasing singular value."""
    x = np.asarray(getattr(segments, "samples", segments), dtype=np.float64)
    if x.shape[0] < d:
        raise ValueError(f"PCA with d={d} needs at least {d} segments, got {x.shape[0]}")
    mean = x.mean(axis=0)
    _, s, vt = np.linalg.svd(x - mean, full_matrices=False)
    tol = s.max() * max(x.shape) * np.finfo(np.float64).eps if s.size else 0.0
    rank = int(np.sum(s > tol))
    if d > rank:
        raise RankError(d, rank)
    comps = vt[:d]
    # fix the sign ambiguity: largest-magnitude loading positive
    flip = comps[np.arange(d), np.abs(comps).argmax(axis=1)] < 0
    comps[flip] *= -1
    return PCAProjection(comps, mean)


def embed(model: RepModel, segments) -> np.ndarray:
    return model.embed(segments)


def _labels_of(segments, labels):
    x = np.asarray(getattr(segments, "samples", segments), dtype=np.float32)
    y = labels if labels is not None else getattr(segments, "labels", None)
    if y is None:
        raise ValueError("fine-tuning needs labels")
    y = np.asarray(y, dtype=np.float32)
    if y.shape != (x.shape[0],):
        raise ValueError("one label per segment required")
    if not np.all((y == 0) | (y == 1)):
        raise ValueError("labels must be 0/1")
    if y.min() == y.max():
        raise ValueError("fine-tuning needs both classes present")
    return x, y


def _train_head_on_features(z: np.ndarray, y: np.ndarray, config: FinetuneConfig) -> torch.nn.Linear:
    # standardize for conditioning, then fold the scaling back into the head weights
    mu = z.mean(axis=0)
    sd = z.std(axis=0)
    sd[sd == 0] = 1.0
    zs = torch.from_numpy(((z - mu) / sd).astype(np.float32))
    yt = torch.from_numpy(y)
    head = fresh_head(z.shape[1], sub_seed(config.seed, "head-init"))
    opt = Optimizer(head.parameters(), lr=config.lr * 10)
    rng = np.random.default_rng(sub_seed(config.seed, "finetune-shuffle"))
    for epoch in range(config.epochs):
        for idx in _batches(len(y), config.batch, rng):
            opt.zero_grad()
            loss = bce_multilabel_loss(head(zs[idx]).squeeze(-1), yt[idx])
            _finite(loss, "linear probe")
            loss.backward()
            opt.step()
    with torch.no_grad():
        w = head.weight / torch.from_numpy(sd.astype(np.float32))
        b = head.bias - (w * torch.from_numpy(mu.astype(np.float32))).sum(dim=1)
        head.weight.copy_(w)
        head.bias.copy_(b)
    return head


def finetune(model: RepModel, segments, labels=None, config: FinetuneConfig = FinetuneConfig()) -> DownstreamModel:
    """Attach a fresh single-logit head and train it on labeled segments.

    ``linear`` freezes the representation (the only option for RP/PCA); ``full``
    also updates a copy of the encoder, at ``encoder_lr_scale`` times the head's rate.
    The input model is never modified.
    """
    x, y = _labels_of(segments, labels)
    if config.mode == "full" and not isinstance(model, EncoderRep):
        raise ValueError(f"full fine-tuning needs a trained encoder, not a {model.kind} model")
    rep = clone_rep(model)
    if config.mode == "linear":
        head = _train_head_on_features(rep.embed(x).astype(np.float64), y, config)
        out = DownstreamModel(rep, head, "linear")
        return out
    return _train_full(rep, x, y, config, config.encoder_lr_scale)


def _train_full(rep: EncoderRep, x, y, config: FinetuneConfig, encoder_lr_scale: float) -> DownstreamModel:
    head = fresh_head(rep.dim, sub_seed(config.seed, "head-init"))
    model = DownstreamModel(rep, head, "full")
    opt = Optimizer([(list(rep.encoder.parameters()), encoder_lr_scale), (list(head.parameters()), 1.0)],
                    lr=config.lr)
    rng = np.random.default_rng(sub_seed(config.seed, "finetune-shuffle"))
    yt = torch.from_numpy(y)
    for epoch in range(1, config.epochs + 1):
        rep.encoder.train()
        total = 0.0
        for idx in _batches(len(y), config.batch, rng):
            opt.zero_grad()
            loss = bce_multilabel_loss(model(torch.from_numpy(x[idx])), yt[idx])
            _finite(loss, f"fine-tuning epoch {epoch}")
            loss.backward()
            opt.step()
            total += loss.item() * len(idx)
        model.log.append({"epoch": epoch, "loss": total / len(y)})
    rep.encoder.eval()
    return model


def train_from_scratch(segments, labels=None, encoder_config: EncoderConfig = EncoderConfig(),
                       config: FinetuneConfig = FinetuneConfig()) -> DownstreamModel:
    """Same architecture, random initialization, supervised training of everything."""
    x, y = _labels_of(segments, labels)
    enc = fresh_encoder(encoder_config, sub_seed(config.seed, "scratch-init"))
    model = _train_full(EncoderRep(enc, "scratch"), x, y, replace(config, mode="full"), 1.0)
    model.task = "scratch"
    return model
