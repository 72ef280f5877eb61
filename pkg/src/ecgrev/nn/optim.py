"""Minimal Adam / SGD. Kept in-house so update order and state are fully explicit."""

from __future__ import annotations

from dataclasses import dataclass, field

import torch


@dataclass
class OptimState:
    kind: str = "adam"
    lr: float = 1e-3
    betas: tuple[float, float] = (0.9, 0.999)
    eps: float = 1e-8
    step: int = 0
    moments: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.lr <= 0:
            raise ValueError("lr must be positive")
        if self.kind not in ("adam", "sgd"):
            raise ValueError(f"unknown optimizer {self.kind!r}")


@torch.no_grad()
def adam_step(params, grads, state: OptimState, lr_scale=None):
    """In-place bias-corrected Adam update of ``params`` (list of tensors).

    ``lr_scale`` optionally gives a per-tensor multiplier on the learning rate.
    Tensors whose gradient is None are left alone.
    """
    state.step += 1
    b1, b2 = state.betas
    c1 = 1 - b1 ** state.step
    c2 = 1 - b2 ** state.step
    for i, (p, g) in enumerate(zip(params, grads)):
        if g is None:
            continue
        if g.shape != p.shape:
            raise ValueError(f"gradient shape {tuple(g.shape)} does not match parameter {tuple(p.shape)}")
        lr = state.lr * (1.0 if lr_scale is None else lr_scale[i])
        if state.kind == "sgd":
            p.sub_(lr * g)
            continue
        m, v = state.moments.get(i, (torch.zeros_like(p), torch.zeros_like(p)))
        m.mul_(b1).add_(g, alpha=1 - b1)
        v.mul_(b2).addcmul_(g, g, value=1 - b2)
        state.moments[i] = (m, v)
        p.sub_(lr * (m / c1) / ((v / c2).sqrt() + state.eps))
    return params, state


class Optimizer:
    def __init__(self, groups, kind="adam", lr=1e-3, betas=(0.9, 0.999), eps=1e-8):
        """``groups`` is an iterable of parameters or of ``(params, lr_multiplier)`` pairs."""
        self.params, self.scales = [], []
        for g in groups:
            if isinstance(g, tuple):
                ps, scale = g
            else:
                ps, scale = [g], 1.0
            for p in ps:
                if p.requires_grad:
                    self.params.append(p)
                    self.scales.append(scale)
        self.state = OptimState(kind, lr, tuple(betas), eps)

    def zero_grad(self):
        for p in self.params:
            p.grad = None

    def step(self):
        adam_step(self.params, [p.grad for p in self.params], self.state, self.scales)
