"""Reverse manipulations, pretext-label construction and the two contrastive augmentations.

All functions accept either a single :class:`Segment` or a ``[n, length]`` array
(rows are segments) and return the same kind.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

import numpy as np

from .signal import Segment


class ReverseLabel(NamedTuple):
    spatial: int
    temporal: int

    @property
    def class_index(self) -> int:
        """Index used by the 4-way softmax head: original 0, temporal 1, spatial 2, both 3."""
        return 2 * self.spatial + self.temporal


ORIGINAL = ReverseLabel(0, 0)
TEMPORAL = ReverseLabel(0, 1)
SPATIAL = ReverseLabel(1, 0)
TEMPORAL_SPATIAL = ReverseLabel(1, 1)


class PretextMode(str, Enum):
    TS = "ts"
    TEMPORAL_ONLY = "temporal"
    SPATIAL_ONLY = "spatial"


def _unwrap(seg):
    if isinstance(seg, Segment):
        return seg.samples, seg
    return np.asarray(seg, dtype=np.float32), None


def _rewrap(values, template: Segment | None, degenerate=False):
    if template is None:
        return values
    return Segment(values, template.source_id, template.offset, degenerate or template.degenerate)


def temporal_reverse(seg):
    values, tpl = _unwrap(seg)
    return _rewrap(np.ascontiguousarray(values[..., ::-1]), tpl)


def spatial_reverse(seg):
    """Negate and rescale back to [0, 1]; constant rows become zeros."""
    values, tpl = _unwrap(seg)
    x = values.astype(np.float64)
    lo = x.min(axis=-1, keepdims=True)
    hi = x.max(axis=-1, keepdims=True)
    span = hi - lo
    flat = span == 0
    out = np.where(flat, 0.0, (hi - x) / np.where(flat, 1.0, span)).astype(np.float32)
    return _rewrap(out, tpl, bool(np.any(flat)))


def ts_reverse(seg):
    return temporal_reverse(spatial_reverse(seg))


def make_pretext_set(segments, mode: PretextMode | str = PretextMode.TS):
    """Expand segments into pretext examples.

    Returns ``(inputs, targets)``. In TS mode every segment yields four rows
    (original, temporal, spatial, temporal-spatial) with targets ``[n*4, 2]`` coded
    ``[spatial, temporal]``; the single-flag modes yield two rows with 0/1 targets.
    Rows are blocked by manipulation: all originals first, then each reversed copy.
    """
    mode = PretextMode(mode)
    if isinstance(segments, np.ndarray):
        x = np.asarray(segments, dtype=np.float32)
    else:
        segs = list(segments)
        if any(s.degenerate for s in segs):
            raise ValueError("degenerate segments cannot be used for pretext training")
        x = np.stack([s.samples for s in segs]) if segs else np.zeros((0, 0), np.float32)
    if x.ndim != 2:
        raise ValueError("segments must form a [n, length] array")
    if x.shape[0] and np.any(x.max(axis=1) == x.min(axis=1)):
        raise ValueError("degenerate segments cannot be used for pretext training")
    n = x.shape[0]
    if mode is PretextMode.TS:
        blocks = [(x, ORIGINAL), (temporal_reverse(x), TEMPORAL),
                  (spatial_reverse(x), SPATIAL), (ts_reverse(x), TEMPORAL_SPATIAL)]
        inputs = np.concatenate([b for b, _ in blocks])
        targets = np.concatenate([np.tile(np.array(lab, dtype=np.float32), (n, 1)) for _, lab in blocks])
        return inputs, targets
    flipped = temporal_reverse(x) if mode is PretextMode.TEMPORAL_ONLY else spatial_reverse(x)
    inputs = np.concatenate([x, flipped])
    targets = np.concatenate([np.zeros(n, np.float32), np.ones(n, np.float32)])
    return inputs, targets


class AugmentKind(str, Enum):
    PERMUTATION = "permutation"
    GAUSSIAN_NOISE = "noise"


@dataclass(frozen=True)
class AugmentSpec:
    kind: AugmentKind = AugmentKind.PERMUTATION
    pieces: int = 4
    sigma: float = 0.01
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "kind", AugmentKind(self.kind))
        if self.kind is AugmentKind.PERMUTATION and self.pieces < 2:
            raise ValueError("permutation needs at least 2 pieces")
        if self.kind is AugmentKind.GAUSSIAN_NOISE and self.sigma < 0:
            raise ValueError("sigma must be non-negative")


def augment(seg, spec: AugmentSpec, rng: np.random.Generator | None = None):
    """Apply one augmentation. ``rng`` overrides the augmentation's own seed (used for per-batch draws)."""
    values, tpl = _unwrap(seg)
    rng = rng if rng is not None else np.random.default_rng(spec.seed)
    length = values.shape[-1]
    if spec.kind is AugmentKind.PERMUTATION:
        if length % spec.pieces:
            raise ValueError(f"pieces={spec.pieces} does not divide segment length {length}")
        chunk = length // spec.pieces
        if values.ndim == 1:
            order = rng.permutation(spec.pieces)
            out = values.reshape(spec.pieces, chunk)[order].reshape(length)
        else:
            rows = values.reshape(values.shape[0], spec.pieces, chunk)
            orders = np.stack([rng.permutation(spec.pieces) for _ in range(values.shape[0])])
            out = np.take_along_axis(rows, orders[:, :, None], axis=1).reshape(values.shape)
    else:
        noise = rng.normal(0.0, spec.sigma, size=values.shape) if spec.sigma > 0 else 0.0
        out = np.clip(values.astype(np.float64) + noise, 0.0, 1.0).astype(np.float32)
    return _rewrap(np.ascontiguousarray(out, dtype=np.float32), tpl)
