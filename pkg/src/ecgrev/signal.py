"""Core signal types: raw recordings, fixed-length segments, windowing and min-max scaling."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

SEGMENT_LENGTH = 3000
DEFAULT_FS = 300
DEFAULT_STRIDE = 1500


class Label(str, Enum):
    NORMAL = "Normal"
    AF = "AF"
    UNLABELED = "Unlabeled"

    @property
    def target(self) -> int | None:
        """Binary downstream target: AF is the positive class."""
        if self is Label.AF:
            return 1
        if self is Label.NORMAL:
            return 0
        return None


@dataclass(frozen=True)
class EcgRecord:
    id: str
    samples: np.ndarray
    fs: int = DEFAULT_FS
    label: Label = Label.UNLABELED
    annotations: np.ndarray | None = None

    def __post_init__(self):
        samples = np.ascontiguousarray(self.samples, dtype=np.float32)
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "label", Label(self.label))
        if self.fs <= 0:
            raise ValueError(f"record {self.id!r}: fs must be positive, got {self.fs}")
        if samples.ndim != 1 or samples.size == 0:
            raise ValueError(f"record {self.id!r}: samples must be a non-empty 1-D sequence")
        if self.annotations is not None:
            ann = np.asarray(self.annotations, dtype=np.float64)
            if ann.size and (np.any(np.diff(ann) <= 0) or ann[0] < 0 or ann[-1] >= self.duration):
                raise ValueError(f"record {self.id!r}: annotations must be strictly increasing within the record")
            ann.setflags(write=False)
            object.__setattr__(self, "annotations", ann)

    @property
    def duration(self) -> float:
        return self.samples.size / self.fs


@dataclass(frozen=True)
class RawWindow:
    samples: np.ndarray
    source_id: str
    offset: int


@dataclass(frozen=True)
class Segment:
    samples: np.ndarray
    source_id: str = ""
    offset: int = 0
    degenerate: bool = False

    def __post_init__(self):
        samples = np.ascontiguousarray(self.samples, dtype=np.float32)
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)
        if self.offset < 0:
            raise ValueError("offset must be non-negative")

    def __len__(self):
        return self.samples.size


def segment(record: EcgRecord, window: int = SEGMENT_LENGTH, stride: int = DEFAULT_STRIDE) -> list[RawWindow]:
    """Slide a window over ``record``; trailing windows that run past the end are dropped."""
    if window <= 0 or stride <= 0:
        raise ValueError("window and stride must be positive")
    n = record.samples.size
    if n < window:
        return []
    return [
        RawWindow(record.samples[start:start + window], record.id, start)
        for start in range(0, n - window + 1, stride)
    ]


def minmax_scale(x: np.ndarray) -> tuple[np.ndarray, bool]:
    """Scale ``x`` to [0, 1]. Constant input maps to zeros and is reported as degenerate."""
    x64 = np.asarray(x, dtype=np.float64)
    lo, hi = x64.min(), x64.max()
    if hi == lo:
        return np.zeros(x64.shape, dtype=np.float32), True
    out = ((x64 - lo) / (hi - lo)).astype(np.float32)
    # float32 rounding can leave values a hair outside the unit interval
    np.clip(out, 0.0, 1.0, out=out)
    return out, False


def normalize(window: RawWindow | np.ndarray, length: int | None = SEGMENT_LENGTH) -> Segment:
    if isinstance(window, RawWindow):
        values, source_id, offset = window.samples, window.source_id, window.offset
    else:
        values, source_id, offset = np.asarray(window), "", 0
    if length is not None and values.size != length:
        raise ValueError(f"window must have {length} samples, got {values.size}")
    scaled, degenerate = minmax_scale(values)
    return Segment(scaled, source_id, offset, degenerate)


@dataclass
class SegmentSet:
    """Column-oriented batch of segments; ``labels`` is None for unlabeled data."""

    samples: np.ndarray
    source_ids: list[str] = field(default_factory=list)
    offsets: np.ndarray | None = None
    labels: np.ndarray | None = None

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float32)
        if self.samples.ndim != 2:
            raise ValueError("samples must be [n, length]")
        n = self.samples.shape[0]
        if not self.source_ids:
            self.source_ids = [f"seg{i}" for i in range(n)]
        if self.offsets is None:
            self.offsets = np.zeros(n, dtype=np.int64)
        if len(self.source_ids) != n or len(self.offsets) != n:
            raise ValueError("source_ids/offsets must match the number of segments")
        if self.labels is not None:
            self.labels = np.asarray(self.labels, dtype=np.int64)
            if self.labels.shape != (n,):
                raise ValueError("labels must be a vector with one entry per segment")

    def __len__(self):
        return self.samples.shape[0]

    @property
    def ids(self) -> list[str]:
        return [f"{s}@{o}" for s, o in zip(self.source_ids, self.offsets)]

    def take(self, idx) -> SegmentSet:
        idx = np.asarray(idx, dtype=np.int64)
        return SegmentSet(
            self.samples[idx],
            [self.source_ids[i] for i in idx],
            self.offsets[idx],
            None if self.labels is None else self.labels[idx],
        )

    def unlabeled(self) -> np.ndarray:
        return self.samples

    @classmethod
    def concat(cls, parts: list[SegmentSet]) -> SegmentSet:
        parts = [p for p in parts if len(p)]
        if not parts:
            return cls(np.zeros((0, SEGMENT_LENGTH), dtype=np.float32))
        labeled = all(p.labels is not None for p in parts)
        return cls(
            np.concatenate([p.samples for p in parts]),
            [s for p in parts for s in p.source_ids],
            np.concatenate([p.offsets for p in parts]),
            np.concatenate([p.labels for p in parts]) if labeled else None,
        )


def segment_records(records, window: int = SEGMENT_LENGTH, stride: int = DEFAULT_STRIDE,
                    keep_degenerate: bool = False) -> SegmentSet:
    """Window and normalize every record. Degenerate windows are dropped unless asked for."""
    rows, ids, offsets, labels = [], [], [], []
    all_labeled = True
    for rec in records:
        target = rec.label.target
        all_labeled &= target is not None
        for w in segment(rec, window, stride):
            seg = normalize(w, window)
            if seg.degenerate and not keep_degenerate:
                continue
            rows.append(seg.samples)
            ids.append(rec.id)
            offsets.append(w.offset)
            labels.append(-1 if target is None else target)
    samples = np.stack(rows) if rows else np.zeros((0, window), dtype=np.float32)
    return SegmentSet(samples, ids, np.asarray(offsets, dtype=np.int64),
                      np.asarray(labels, dtype=np.int64) if all_labeled else None)
