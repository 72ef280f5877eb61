"""On-disk corpus format and seeded dataset splitting.

A corpus directory holds ``manifest.csv`` (header ``id,label,fs,path``) and one
sample file per record: header-free little-endian float32 (``.f32le``) or one
decimal value per line (``.txt``). An optional ``rpeaks.csv`` (``id,r_peak_s``,
one row per peak) carries ground-truth R-peak times for synthetic corpora.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np

from .signal import EcgRecord, Label, SegmentSet

MANIFEST_NAME = "manifest.csv"
MANIFEST_HEADER = ["id", "label", "fs", "path"]
RPEAKS_NAME = "rpeaks.csv"
RPEAKS_HEADER = ["id", "r_peak_s"]


class IngestError(Exception):
    pass


class DuplicateIdError(IngestError):
    def __init__(self, record_id):
        super().__init__(f"duplicate record id {record_id!r} in manifest")
        self.record_id = record_id


class MissingFileError(IngestError):
    pass


class SampleSizeError(IngestError):
    pass


class TextFormatError(IngestError):
    pass


class InsufficientDataError(IngestError):
    pass


@dataclass(frozen=True)
class ManifestEntry:
    id: str
    label: Label
    fs: int
    path: str


@dataclass
class Manifest:
    entries: list[ManifestEntry]
    root: Path

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def get(self, record_id: str) -> ManifestEntry:
        for e in self.entries:
            if e.id == record_id:
                return e
        raise KeyError(record_id)


def read_manifest(path) -> Manifest:
    """Read a manifest CSV; ``path`` may be the file itself or its directory."""
    path = Path(path)
    if path.is_dir():
        path = path / MANIFEST_NAME
    if not path.is_file():
        raise MissingFileError(f"manifest not found: {path}")
    entries, seen = [], set()
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != MANIFEST_HEADER:
            raise IngestError(f"{path}: expected header {','.join(MANIFEST_HEADER)}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 4:
                raise IngestError(f"{path}:{lineno}: expected 4 columns, got {len(row)}")
            rid, label, fs, rel = (c.strip() for c in row)
            if rid in seen:
                raise DuplicateIdError(rid)
            seen.add(rid)
            try:
                fs_val = int(fs)
                lab = Label(label)
            except ValueError as exc:
                raise IngestError(f"{path}:{lineno}: {exc}") from None
            if fs_val <= 0:
                raise IngestError(f"{path}:{lineno}: fs must be positive")
            entries.append(ManifestEntry(rid, lab, fs_val, rel))
    return Manifest(entries, path.parent)


def read_samples(path) -> np.ndarray:
    path = Path(path)
    if not path.is_file():
        raise MissingFileError(f"sample file not found: {path}")
    if path.suffix == ".txt":
        values = []
        with open(path) as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    values.append(float(line))
                except ValueError:
                    raise TextFormatError(f"{path}:{lineno}: not a number: {line!r}") from None
        return np.asarray(values, dtype=np.float32)
    raw = path.read_bytes()
    if len(raw) % 4:
        raise SampleSizeError(f"{path}: size {len(raw)} is not a multiple of 4 bytes")
    return np.frombuffer(raw, dtype="<f4").astype(np.float32)


def read_rpeaks(directory) -> dict[str, np.ndarray]:
    """R-peak annotations by record id; empty if the corpus has none."""
    path = Path(directory) / RPEAKS_NAME
    if not path.is_file():
        return {}
    peaks: dict[str, list[float]] = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        if next(reader, None) != RPEAKS_HEADER:
            raise IngestError(f"{path}: header must be {','.join(RPEAKS_HEADER)}")
        for lineno, row in enumerate(reader, start=2):
            try:
                peaks.setdefault(row[0], []).append(float(row[1]))
            except (IndexError, ValueError):
                raise IngestError(f"{path}:{lineno}: malformed row {row!r}") from None
    return {k: np.asarray(v) for k, v in peaks.items()}


def load_record(manifest: Manifest, record_id: str, annotations=None) -> EcgRecord:
    entry = manifest.get(record_id)
    samples = read_samples(manifest.root / entry.path)
    return EcgRecord(entry.id, samples, entry.fs, entry.label, annotations)


def load_records(manifest: Manifest) -> list[EcgRecord]:
    peaks = read_rpeaks(manifest.root)
    return [load_record(manifest, e.id, peaks.get(e.id)) for e in manifest]


def write_corpus(records, directory, fmt: str = "f32le") -> Manifest:
    """Write records plus manifest. ``fmt`` is ``f32le`` (bit-exact) or ``txt``."""
    if fmt not in ("f32le", "txt"):
        raise ValueError("fmt must be 'f32le' or 'txt'")
    directory = Path(directory)
    try:
        directory.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IngestError(f"cannot create {directory}: {exc}") from exc
    entries = []
    seen = set()
    for rec in records:
        if rec.id in seen:
            raise DuplicateIdError(rec.id)
        seen.add(rec.id)
        rel = f"{rec.id}.{fmt}"
        target = directory / rel
        try:
            if fmt == "f32le":
                target.write_bytes(np.asarray(rec.samples, dtype="<f4").tobytes())
            else:
                target.write_text("".join(f"{v:.9g}\n" for v in rec.samples.tolist()))
        except OSError as exc:
            raise IngestError(f"cannot write {target}: {exc}") from exc
        entries.append(ManifestEntry(rec.id, rec.label, rec.fs, rel))
    with open(directory / MANIFEST_NAME, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(MANIFEST_HEADER)
        for e in entries:
            w.writerow([e.id, e.label.value, e.fs, e.path])
    annotated = [r for r in records if r.annotations is not None]
    if annotated:
        with open(directory / RPEAKS_NAME, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(RPEAKS_HEADER)
            for rec in annotated:
                for t in rec.annotations.tolist():
                    w.writerow([rec.id, repr(float(t))])
    return Manifest(entries, directory)


class SplitLevel(str, Enum):
    RECORD = "record"
    SEGMENT = "segment"


@dataclass(frozen=True)
class SplitSpec:
    n_train: int | None = None
    n_per_class: int | None = None
    seed: int = 0
    level: SplitLevel = SplitLevel.RECORD

    def __post_init__(self):
        object.__setattr__(self, "level", SplitLevel(self.level))
        if self.n_train is None and self.n_per_class is None:
            raise ValueError("one of n_train or n_per_class is required")
        for name in ("n_train", "n_per_class"):
            v = getattr(self, name)
            if v is not None and v < 0:
                raise ValueError(f"{name} must be non-negative")


def _groups(segments: SegmentSet, level: SplitLevel) -> list[np.ndarray]:
    if level is SplitLevel.SEGMENT:
        return [np.array([i]) for i in range(len(segments))]
    order: dict[str, list[int]] = {}
    for i, sid in enumerate(segments.source_ids):
        order.setdefault(sid, []).append(i)
    return [np.asarray(v) for v in order.values()]


def split(segments: SegmentSet, spec: SplitSpec) -> tuple[SegmentSet, SegmentSet]:
    """Seeded train/test split.

    Groups (records, or single segments) are visited in shuffled order and moved to
    the train side until the requested count is filled; a record that overshoots is
    truncated and its leftover segments are discarded rather than sent to test. With
    ``n_per_class`` the fill is done per downstream class. Everything never touched
    becomes the test side.
    """
    rng = np.random.default_rng(spec.seed)
    groups = _groups(segments, spec.level)
    order = rng.permutation(len(groups))
    groups = [groups[i] for i in order]

    train_idx: list[int] = []
    used = np.zeros(len(groups), dtype=bool)
    if spec.n_per_class is not None:
        if segments.labels is None:
            raise InsufficientDataError("balanced split needs labeled segments")
        for cls in (0, 1):
            need = spec.n_per_class
            for gi, g in enumerate(groups):
                if need == 0:
                    break
                if used[gi] or segments.labels[g[0]] != cls:
                    continue
                take = g[:need]
                train_idx.extend(take.tolist())
                need -= take.size
                used[gi] = True
            if need:
                avail = int(np.sum(segments.labels == cls))
                raise InsufficientDataError(
                    f"class {cls}: requested {spec.n_per_class} segments, only {avail} available")
    else:
        need = spec.n_train
        for gi, g in enumerate(groups):
            if need == 0:
                break
            take = g[:need]
            train_idx.extend(take.tolist())
            need -= take.size
            used[gi] = True
        if need:
            raise InsufficientDataError(f"requested {spec.n_train} segments, only {len(segments)} available")

    test_idx = [i for gi, g in enumerate(groups) if not used[gi] for i in g.tolist()]
    return segments.take(sorted(train_idx)), segments.take(sorted(test_idx))


def split_records(segments: SegmentSet, test_fraction: float, seed: int) -> tuple[SegmentSet, SegmentSet]:
    """Partition by record id: roughly ``test_fraction`` of the records (per class) go to test."""
    if not 0.0 <= test_fraction < 1.0:
        raise ValueError("test_fraction must lie in [0, 1)")
    rng = np.random.default_rng(seed)
    ids = list(dict.fromkeys(segments.source_ids))
    labels = {}
    if segments.labels is not None:
        for sid, lab in zip(segments.source_ids, segments.labels):
            labels.setdefault(sid, int(lab))
    test_ids = set()
    for cls in sorted(set(labels.values()) or {None}):
        members = [i for i in ids if labels.get(i) == cls]
        members = [members[j] for j in rng.permutation(len(members))]
        test_ids.update(members[: int(round(test_fraction * len(members)))])
    is_test = np.array([sid in test_ids for sid in segments.source_ids])
    return segments.take(np.flatnonzero(~is_test)), segments.take(np.flatnonzero(is_test))
