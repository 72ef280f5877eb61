"""Layer-wise relevance propagation for downstream models, plus heatmap export."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np
import torch
from torch import nn
import torch.nn.functional as F

from .models import DownstreamModel, EncoderRep, LinearRep
from .nn.encoder import Encoder, ResidualBlock

DEFAULT_EPSILON = 1e-6
HEATMAP_HEADER = ["index", "sample_value", "R"]


class Rule(str, Enum):
    EPSILON = "epsilon"
    ZERO = "zero"


class UnsupportedLayerError(TypeError):
    def __init__(self, name, module):
        super().__init__(f"no relevance rule for layer {name!r} ({type(module).__name__})")
        self.layer = name


@dataclass
class RelevanceMap:
    segment_id: str
    scores: np.ndarray
    samples: np.ndarray
    output_logit: float
    rule: Rule
    epsilon: float

    @property
    def residual(self) -> float:
        """Relevance lost to biases and stabilizers: sum(R) - logit."""
        return float(self.scores.sum() - self.output_logit)


_SUPPORTED = (Encoder, ResidualBlock, nn.Conv1d, nn.Linear, nn.ModuleList)


def _check_layers(model: DownstreamModel):
    for name, mod in model.named_modules():
        if name == "" or name.startswith("rep"):
            continue
        if not isinstance(mod, _SUPPORTED):
            raise UnsupportedLayerError(name, mod)


def _stabilize(z: torch.Tensor, eps: float) -> torch.Tensor:
    return z + eps * torch.where(z >= 0, torch.ones_like(z), -torch.ones_like(z))


def _safe_div(num: torch.Tensor, den: torch.Tensor) -> torch.Tensor:
    return torch.where(den == 0, torch.zeros_like(num), num / torch.where(den == 0, torch.ones_like(den), den))


def _lrp_affine(fn, a: torch.Tensor, relevance: torch.Tensor, eps: float) -> torch.Tensor:
    # R_j = a_j * sum_k w_jk R_k / (z_k + eps sign z_k), via one vector-Jacobian product
    a = a.detach().requires_grad_(True)
    z = fn(a)
    s = _safe_div(relevance, _stabilize(z, eps)).detach()
    (grad,) = torch.autograd.grad((z * s).sum(), a)
    return (a * grad).detach()


def _split_sum(parts: list[torch.Tensor], relevance: torch.Tensor, eps: float) -> list[torch.Tensor]:
    total = _stabilize(sum(parts), eps)
    return [_safe_div(p * relevance, total) for p in parts]


def _encoder_lrp(enc: Encoder, x: torch.Tensor, r_rep_fn, eps: float) -> tuple[torch.Tensor, torch.Tensor]:
    """Replay the encoder forward, then push relevance from the representation back to ``x``."""
    a0 = x[:, None, :]
    stem_out = F.relu(enc.stem(a0))
    trace = []
    h = stem_out
    for s, blocks in enumerate(enc.stages):
        gain = enc.gains[s]
        for block in blocks:
            c1 = block.conv1(h)
            r = F.relu(c1)
            branch = block.conv2(r) * gain
            skip = h if block.shortcut is None else block.shortcut(h)
            out = F.relu(skip + branch)
            trace.append((block, gain, h, r, skip, branch))
            h = out
    pooled = h.mean(dim=-1)
    rep = enc.proj(pooled)
    logit, r_rep = r_rep_fn(rep)

    r_pooled = _lrp_affine(enc.proj, pooled, r_rep, eps)
    # global average pooling: share each channel's relevance in proportion to its activations
    r_h = _safe_div(h * r_pooled[..., None], _stabilize(h.sum(dim=-1, keepdim=True), eps))
    for block, gain, h_in, r, skip, branch in reversed(trace):
        # ReLU after the add passes relevance unchanged; the add splits it by contribution
        r_skip, r_branch = _split_sum([skip, branch], r_h, eps)
        # scalar gain: y = g * x keeps relevance as is
        r_r = _lrp_affine(block.conv2, r, r_branch, eps)
        r_in = _lrp_affine(block.conv1, h_in, r_r, eps)
        if block.shortcut is None:
            r_in = r_in + r_skip
        else:
            r_in = r_in + _lrp_affine(block.shortcut, h_in, r_skip, eps)
        r_h = r_in
    r_x = _lrp_affine(enc.stem, a0, r_h, eps)
    return logit, r_x[:, 0, :]


def lrp_batch(model: DownstreamModel, segments, rule: Rule | str = Rule.EPSILON,
              epsilon: float = DEFAULT_EPSILON) -> tuple[np.ndarray, np.ndarray]:
    """Relevance of every input sample for a batch; returns ``(R [B, L], logits [B])``.

    Runs in float64 on a copy of the model so the conservation bookkeeping is exact
    to rounding.
    """
    rule = Rule(rule)
    eps = 0.0 if rule is Rule.ZERO else float(epsilon)
    _check_layers(model)
    x = torch.as_tensor(np.asarray(getattr(segments, "samples", segments), dtype=np.float64))
    if x.dim() == 1:
        x = x[None, :]
    head = _float64(model.head)

    def from_rep(rep):
        logit = head(rep)
        return logit[:, 0], _lrp_affine(head, rep, logit, eps)

    if isinstance(model.rep, EncoderRep):
        enc = _float64(model.rep.encoder).eval()
        logit, r_x = _encoder_lrp(enc, x, from_rep, eps)
    elif isinstance(model.rep, LinearRep):
        w, b = (torch.as_tensor(v, dtype=torch.float64) for v in model.rep.linear_map())
        lin = lambda a: F.linear(a, w, b)  # noqa: E731
        rep = lin(x)
        logit, r_rep = from_rep(rep)
        r_x = _lrp_affine(lin, x, r_rep, eps)
    else:
        raise UnsupportedLayerError("rep", model.rep)
    return r_x.numpy(), logit.detach().numpy()


def _float64(module: nn.Module) -> nn.Module:
    import copy

    return copy.deepcopy(module).double()


def lrp(model: DownstreamModel, segment, segment_id: str = "", rule: Rule | str = Rule.EPSILON,
        epsilon: float = DEFAULT_EPSILON) -> RelevanceMap:
    samples = np.asarray(getattr(segment, "samples", segment), dtype=np.float64).ravel()
    sid = segment_id or getattr(segment, "source_id", "")
    r, logit = lrp_batch(model, samples[None, :], rule, epsilon)
    rule = Rule(rule)
    return RelevanceMap(sid, r[0], samples, float(logit[0]), rule, 0.0 if rule is Rule.ZERO else epsilon)


def peak_focus(relevance: np.ndarray, r_peak_samples, fs: int, half_window_s: float = 0.05) -> dict:
    """Mean |R| within +-``half_window_s`` of each R peak versus everywhere else."""
    r = np.abs(np.asarray(relevance, dtype=np.float64))
    near = np.zeros(r.size, dtype=bool)
    hw = int(round(half_window_s * fs))
    for p in np.asarray(r_peak_samples, dtype=np.int64):
        near[max(0, p - hw):min(r.size, p + hw + 1)] = True
    inside = float(r[near].mean()) if near.any() else float("nan")
    outside = float(r[~near].mean()) if (~near).any() else float("nan")
    return {"mean_abs_R_near_peaks": inside, "mean_abs_R_elsewhere": outside,
            "ratio": inside / outside if outside else float("inf")}


def heatmap_export(rmap: RelevanceMap, path, svg_path=None) -> Path:
    """CSV ``index,sample_value,R``; optionally an SVG trace colored by normalized |R|."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(HEATMAP_HEADER)
            for i, (v, r) in enumerate(zip(rmap.samples.tolist(), rmap.scores.tolist())):
                w.writerow([i, f"{v:.9g}", f"{r:.9g}"])
    except OSError as exc:
        raise OSError(f"cannot write heatmap to {path}: {exc}") from exc
    if svg_path is not None:
        write_heatmap_svg(rmap, svg_path)
    return path


def read_heatmap(path) -> tuple[np.ndarray, np.ndarray]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        if next(reader) != HEATMAP_HEADER:
            raise ValueError(f"{path}: unexpected header")
        rows = [(float(v), float(r)) for _, v, r in reader]
    arr = np.asarray(rows, dtype=np.float64).reshape(-1, 2)
    return arr[:, 0], arr[:, 1]


def write_heatmap_svg(rmap: RelevanceMap, path, width: int = 1200, height: int = 200, cmap: str = "inferno"):
    from matplotlib import colormaps
    from matplotlib.colors import to_hex

    mag = np.abs(rmap.scores)
    top = mag.max()
    level = mag / top if top > 0 else np.zeros_like(mag)
    colors = colormaps[cmap]
    x = np.linspace(0, width, rmap.samples.size)
    y = height * (1.0 - np.asarray(rmap.samples, dtype=np.float64))
    lines = []
    for i in range(rmap.samples.size - 1):
        c = to_hex(colors(0.15 + 0.85 * (level[i] + level[i + 1]) / 2))
        lines.append(f'<line x1="{x[i]:.2f}" y1="{y[i]:.2f}" x2="{x[i + 1]:.2f}" y2="{y[i + 1]:.2f}" stroke="{c}"/>')
    body = "\n".join(lines)
    Path(path).write_text(
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" stroke-width="1.5">\n'
        f'<rect width="100%" height="100%" fill="#111111"/>\n{body}\n</svg>\n')
