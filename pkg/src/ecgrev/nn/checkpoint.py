"""Checkpoint container: a ``.npz`` archive of little-endian float32 tensors plus a JSON header."""

from __future__ import annotations

import io
import json
from pathlib import Path

import numpy as np

FORMAT_VERSION = 1
_META_KEY = "__meta__"


class CheckpointError(Exception):
    pass


def save_checkpoint(path, meta: dict, tensors: dict[str, np.ndarray]) -> None:
    payload = {"format_version": FORMAT_VERSION, **meta}
    arrays = {name: np.ascontiguousarray(t, dtype="<f4") for name, t in tensors.items()}
    if _META_KEY in arrays:
        raise CheckpointError(f"tensor name {_META_KEY!r} is reserved")
    arrays[_META_KEY] = np.frombuffer(json.dumps(payload, sort_keys=True).encode(), dtype=np.uint8)
    buf = io.BytesIO()
    np.savez(buf, **arrays)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(buf.getvalue())


def load_checkpoint(path) -> tuple[dict, dict[str, np.ndarray]]:
    path = Path(path)
    if not path.is_file():
        raise CheckpointError(f"checkpoint not found: {path}")
    try:
        with np.load(path, allow_pickle=False) as z:
            arrays = {k: z[k] for k in z.files}
    except (OSError, ValueError) as exc:
        raise CheckpointError(f"{path}: not a checkpoint ({exc})") from exc
    if _META_KEY not in arrays:
        raise CheckpointError(f"{path}: missing header")
    meta = json.loads(arrays.pop(_META_KEY).tobytes().decode())
    if meta.get("format_version") != FORMAT_VERSION:
        raise CheckpointError(f"{path}: unsupported format version {meta.get('format_version')}")
    return meta, arrays


def module_tensors(module, prefix="") -> dict[str, np.ndarray]:
    return {prefix + k: v.detach().cpu().numpy().astype("<f4") for k, v in module.state_dict().items()}


def load_module_tensors(module, tensors: dict[str, np.ndarray], prefix="") -> None:
    import torch

    state = {k[len(prefix):]: torch.from_numpy(np.array(v, dtype=np.float32))
             for k, v in tensors.items() if k.startswith(prefix)}
    missing, unexpected = module.load_state_dict(state, strict=False)
    if missing or unexpected:
        raise CheckpointError(f"parameter mismatch: missing={missing} unexpected={unexpected}")
