from __future__ import annotations

import warnings
from dataclasses import asdict, dataclass

import torch
from torch import nn
import torch.nn.functional as F

from ..signal import SEGMENT_LENGTH

STANDARD_DIMS = (64, 128, 256)


@dataclass(frozen=True)
class EncoderConfig:
    """Residual 1-D conv encoder shape.

    Every stage opens with a block that halves the time axis and doubles the
    channel count. ``stem_stride`` > 1 subsamples right at the stem, which is what
    makes desk-scale runs on one CPU affordable.
    """

    stages: int = 4
    base_width: int = 16
    blocks_per_stage: int = 2
    kernel: int = 7
    rep_dim: int = 128
    stem_stride: int = 1
    cardinality: int = 1
    bias: bool = True
    gain_init: float = 0.5

    def __post_init__(self):
        for name in ("stages", "base_width", "blocks_per_stage", "kernel", "rep_dim", "stem_stride", "cardinality"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.kernel % 2 == 0:
            raise ValueError("kernel must be odd")
        if self.base_width % self.cardinality:
            raise ValueError("base_width must be divisible by cardinality")
        if self.rep_dim not in STANDARD_DIMS:
            warnings.warn(f"rep_dim {self.rep_dim} is outside the studied set {STANDARD_DIMS}", stacklevel=3)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> EncoderConfig:
        return cls(**d)

    @property
    def out_channels(self) -> int:
        return self.base_width * 2 ** self.stages


class ResidualBlock(nn.Module):
    """conv-ReLU-conv scaled by the stage gain, added to the shortcut, then ReLU."""

    def __init__(self, c_in, c_out, kernel, stride, groups=1, bias=True):
        super().__init__()
        pad = kernel // 2
        self.conv1 = nn.Conv1d(c_in, c_out, kernel, stride=stride, padding=pad, groups=groups, bias=bias)
        self.conv2 = nn.Conv1d(c_out, c_out, kernel, padding=pad, groups=groups, bias=bias)
        if stride != 1 or c_in != c_out:
            self.shortcut = nn.Conv1d(c_in, c_out, 1, stride=stride, bias=bias)
        else:
            self.shortcut = None

    def forward(self, x, gain):
        branch = self.conv2(F.relu(self.conv1(x))) * gain
        skip = x if self.shortcut is None else self.shortcut(x)
        return F.relu(skip + branch)


class Encoder(nn.Module):
    """Maps ``[B, L]`` (or ``[B, 1, L]``) segments to ``[B, rep_dim]`` representations."""

    def __init__(self, config: EncoderConfig = EncoderConfig()):
        super().__init__()
        self.config = config
        c = config.base_width
        self.stem = nn.Conv1d(1, c, config.kernel, stride=config.stem_stride,
                              padding=config.kernel // 2, bias=config.bias)
        self.stages = nn.ModuleList()
        for _ in range(config.stages):
            blocks = nn.ModuleList()
            for b in range(config.blocks_per_stage):
                c_out = 2 * c if b == 0 else c
                blocks.append(ResidualBlock(c, c_out, config.kernel, 2 if b == 0 else 1,
                                            config.cardinality, config.bias))
                c = c_out
            self.stages.append(blocks)
        self.gains = nn.Parameter(torch.full((config.stages,), float(config.gain_init)))
        self.proj = nn.Linear(c, config.rep_dim, bias=config.bias)
        self.reset_parameters()

    def reset_parameters(self):
        # He init keeps activation scale through the stack; there is no normalization layer to do it
        for m in self.modules():
            if isinstance(m, (nn.Conv1d, nn.Linear)):
                nn.init.kaiming_normal_(m.weight, nonlinearity="relu" if m is not self.proj else "linear")
                if m.bias is not None:
                    nn.init.zeros_(m.bias)

    @property
    def rep_dim(self) -> int:
        return self.config.rep_dim

    def features(self, x):
        if x.dim() == 2:
            x = x.unsqueeze(1)
        if x.dim() != 3 or x.shape[1] != 1:
            raise ValueError(f"expected input [B, L] or [B, 1, L], got {tuple(x.shape)}")
        h = F.relu(self.stem(x))
        for s, blocks in enumerate(self.stages):
            for block in blocks:
                h = block(h, self.gains[s])
        return h

    def forward(self, x):
        return self.proj(self.features(x).mean(dim=-1))


def encoder_forward(enc: Encoder, batch) -> torch.Tensor:
    """Forward a batch given as a tensor or array of shape ``[B, L]``."""
    x = torch.as_tensor(batch, dtype=next(enc.parameters()).dtype)
    if x.dim() != 2 or x.shape[1] != SEGMENT_LENGTH:
        raise ValueError(f"expected batch [B, {SEGMENT_LENGTH}], got {tuple(x.shape)}")
    if not torch.isfinite(x).all():
        raise ValueError("batch contains non-finite values")
    return enc(x)


class Decoder(nn.Module):
    """Mirror of :class:`Encoder` for the autoencoder baseline (upsample + conv stages)."""

    def __init__(self, config: EncoderConfig, length: int = SEGMENT_LENGTH):
        super().__init__()
        self.length = length
        self.config = config
        stem_len = -(-length // config.stem_stride)
        self.seed_len = stem_len
        for _ in range(config.stages):
            self.seed_len = -(-self.seed_len // 2)
        c = config.out_channels
        self.seed_channels = c
        self.fc = nn.Linear(config.rep_dim, c * self.seed_len)
        self.ups = nn.ModuleList()
        for _ in range(config.stages):
            self.ups.append(nn.ConvTranspose1d(c, c // 2, 4, stride=2, padding=1))
            c //= 2
        self.out = nn.Conv1d(c, 1, config.kernel, padding=config.kernel // 2)

    def forward(self, z):
        h = F.relu(self.fc(z)).view(z.shape[0], self.seed_channels, self.seed_len)
        for up in self.ups:
            h = F.relu(up(h))
        h = self.out(h)
        h = F.interpolate(h, size=self.length, mode="linear", align_corners=False)
        return torch.sigmoid(h.squeeze(1))


def backward(loss: torch.Tensor) -> None:
    """Reverse-mode pass from a scalar loss; refuses tensors with no recorded graph."""
    if loss.grad_fn is None:
        raise RuntimeError("backward called on a tensor with no recorded forward graph")
    loss.backward()
