"""Representation models (trained encoder, random projection, PCA) and the downstream classifier."""

from __future__ import annotations

import copy

import numpy as np
import torch
from torch import nn

from .nn.checkpoint import (CheckpointError, load_checkpoint, load_module_tensors, module_tensors,
                            save_checkpoint)
from .nn.encoder import Encoder, EncoderConfig
from .signal import SEGMENT_LENGTH


def _as_batch(segments) -> np.ndarray:
    x = segments.samples if hasattr(segments, "samples") else segments
    x = np.asarray(x, dtype=np.float32)
    if x.ndim == 1:
        x = x[None, :]
    return x


class RepModel:
    kind: str = ""
    dim: int

    def embed(self, segments, batch_size: int = 256) -> np.ndarray:
        raise NotImplementedError

    def linear_map(self) -> tuple[np.ndarray, np.ndarray]:
        """``(weight [d, L], bias [d])`` for the fixed linear kinds."""
        raise NotImplementedError


class EncoderRep(RepModel):
    kind = "encoder"

    def __init__(self, encoder: Encoder, task: str = "", log: list | None = None):
        self.encoder = encoder
        self.task = task
        self.log = log or []

    @property
    def dim(self) -> int:
        return self.encoder.rep_dim

    @property
    def config(self) -> EncoderConfig:
        return self.encoder.config

    @torch.no_grad()
    def embed(self, segments, batch_size: int = 256) -> np.ndarray:
        x = _as_batch(segments)
        self.encoder.eval()
        out = [self.encoder(torch.from_numpy(x[i:i + batch_size])).numpy()
               for i in range(0, x.shape[0], batch_size)]
        return np.concatenate(out) if out else np.zeros((0, self.dim), np.float32)


class LinearRep(RepModel):
    def __init__(self, weight: np.ndarray, mean: np.ndarray | None = None):
        self.weight = np.asarray(weight, dtype=np.float32)
        self.mean = None if mean is None else np.asarray(mean, dtype=np.float32)

    @property
    def dim(self) -> int:
        return self.weight.shape[0]

    def embed(self, segments, batch_size: int = 256) -> np.ndarray:
        x = _as_batch(segments).astype(np.float64)
        if x.shape[1] != self.weight.shape[1]:
            raise ValueError(f"segment length {x.shape[1]} does not match model input {self.weight.shape[1]}")
        if self.mean is not None:
            x = x - self.mean
        return (x @ self.weight.T.astype(np.float64)).astype(np.float32)

    def linear_map(self):
        w = self.weight.astype(np.float64)
        b = np.zeros(self.dim) if self.mean is None else -(w @ self.mean.astype(np.float64))
        return w, b


class RandomProjection(LinearRep):
    kind = "rp"


class PCAProjection(LinearRep):
    kind = "pca"

    @property
    def components(self) -> np.ndarray:
        return self.weight


class DownstreamModel(nn.Module):
    """Representation model plus a single-logit head; ``scores`` returns sigmoid(logit)."""

    def __init__(self, rep: RepModel, head: nn.Linear | None = None, mode: str = "linear", task: str = ""):
        super().__init__()
        self.rep = rep
        self.head = head or nn.Linear(rep.dim, 1)
        self.mode = mode
        self.task = task or getattr(rep, "task", "") or rep.kind
        self.log: list = []
        if isinstance(rep, EncoderRep):
            self.encoder = rep.encoder

    def forward(self, x):
        """Logits for a ``[B, L]`` tensor (encoder kinds keep the graph)."""
        if isinstance(self.rep, EncoderRep):
            z = self.rep.encoder(x)
        else:
            w, b = self.rep.linear_map()
            z = x @ torch.as_tensor(w, dtype=x.dtype).T + torch.as_tensor(b, dtype=x.dtype)
        return self.head(z).squeeze(-1)

    @torch.no_grad()
    def logits(self, segments, batch_size: int = 256) -> np.ndarray:
        z = self.rep.embed(segments, batch_size)
        return self.head(torch.from_numpy(z)).squeeze(-1).numpy().astype(np.float64)

    def scores(self, segments, batch_size: int = 256) -> np.ndarray:
        lg = self.logits(segments, batch_size)
        return 1.0 / (1.0 + np.exp(-lg))


def fresh_encoder(config: EncoderConfig, seed: int) -> Encoder:
    with torch.random.fork_rng(devices=[]):
        torch.manual_seed(seed)
        return Encoder(config)


def fresh_head(in_dim: int, seed: int, out_dim: int = 1) -> nn.Linear:
    with torch.random.fork_rng(devices=[]):
        torch.manual_seed(seed)
        return nn.Linear(in_dim, out_dim)


def _rep_state(rep: RepModel) -> tuple[dict, dict]:
    if isinstance(rep, EncoderRep):
        return ({"rep_kind": "encoder", "encoder": rep.config.to_dict(), "task": rep.task},
                module_tensors(rep.encoder, "encoder."))
    tensors = {"rep.weight": rep.weight}
    if rep.mean is not None:
        tensors["rep.mean"] = rep.mean
    return {"rep_kind": rep.kind, "task": rep.kind}, tensors


def _rep_from_state(meta: dict, tensors: dict) -> RepModel:
    kind = meta["rep_kind"]
    if kind == "encoder":
        enc = Encoder(EncoderConfig.from_dict(meta["encoder"]))
        load_module_tensors(enc, tensors, "encoder.")
        return EncoderRep(enc, meta.get("task", ""))
    cls = {"rp": RandomProjection, "pca": PCAProjection}.get(kind)
    if cls is None:
        raise CheckpointError(f"unknown representation kind {kind!r}")
    return cls(tensors["rep.weight"], tensors.get("rep.mean"))


def save_model(model, path, extra: dict | None = None) -> None:
    """Write a :class:`RepModel` or :class:`DownstreamModel` checkpoint."""
    if isinstance(model, DownstreamModel):
        meta, tensors = _rep_state(model.rep)
        meta.update(model="downstream", mode=model.mode, task=model.task)
        tensors.update(module_tensors(model.head, "head."))
    else:
        meta, tensors = _rep_state(model)
        meta["model"] = "rep"
    meta["extra"] = extra or {}
    save_checkpoint(path, meta, tensors)


def load_model(path):
    meta, tensors = load_checkpoint(path)
    rep = _rep_from_state(meta, tensors)
    if meta.get("model") == "downstream":
        head = nn.Linear(rep.dim, 1)
        load_module_tensors(head, tensors, "head.")
        return DownstreamModel(rep, head, meta.get("mode", "linear"), meta.get("task", ""))
    return rep


def checkpoint_extra(path) -> dict:
    meta, _ = load_checkpoint(path)
    return meta.get("extra", {})


def clone_rep(rep: RepModel) -> RepModel:
    if isinstance(rep, EncoderRep):
        return EncoderRep(copy.deepcopy(rep.encoder), rep.task, list(rep.log))
    return copy.deepcopy(rep)


__all__ = [
    "RepModel", "EncoderRep", "RandomProjection", "PCAProjection", "DownstreamModel",
    "fresh_encoder", "fresh_head", "save_model", "load_model", "clone_rep", "SEGMENT_LENGTH",
]
