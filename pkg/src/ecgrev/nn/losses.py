from __future__ import annotations

import math

import torch
import torch.nn.functional as F


def bce_multilabel_loss(logits: torch.Tensor, targets: torch.Tensor) -> torch.Tensor:
    """Mean binary cross-entropy over batch and bits, in the log-sum-exp form."""
    targets = torch.as_tensor(targets, dtype=logits.dtype)
    if logits.shape != targets.shape:
        raise ValueError(f"logits {tuple(logits.shape)} vs targets {tuple(targets.shape)}")
    if not torch.all((targets == 0) | (targets == 1)):
        raise ValueError("targets must be 0 or 1")
    # max(l, 0) - l*t + log(1 + exp(-|l|))
    per = logits.clamp(min=0) - logits * targets + torch.log1p(torch.exp(-logits.abs()))
    return per.mean()


def softmax_ce_loss(logits: torch.Tensor, classes: torch.Tensor) -> torch.Tensor:
    return F.cross_entropy(logits, torch.as_tensor(classes, dtype=torch.long))


def ntxent_loss(reps: torch.Tensor, pairing, tau: float = 0.5) -> torch.Tensor:
    """NT-Xent: cross-entropy of each anchor's positive against all other rows.

    ``pairing[i]`` is the row index of the positive partner of row ``i``.
    """
    if tau <= 0:
        raise ValueError("tau must be positive")
    n = reps.shape[0]
    pairing = torch.as_tensor(pairing, dtype=torch.long)
    if pairing.shape != (n,) or torch.any(pairing == torch.arange(n)) or torch.any(pairing[pairing] != torch.arange(n)):
        raise ValueError("pairing must be a fixed-point-free involution over the rows")
    norms = reps.norm(dim=1, keepdim=True)
    if torch.any(norms == 0):
        raise ValueError("zero-norm representation row")
    unit = reps / norms
    sim = unit @ unit.T / tau
    sim = sim.masked_fill(torch.eye(n, dtype=torch.bool), float("-inf"))
    return F.cross_entropy(sim, pairing)


def ntxent_pairing(n: int) -> torch.Tensor:
    """Pairing for views stacked as ``[view_a(0..n-1); view_b(0..n-1)]``."""
    idx = torch.arange(n)
    return torch.cat([idx + n, idx])


def reconstruction_loss(x: torch.Tensor, x_hat: torch.Tensor) -> torch.Tensor:
    """Per-segment sum of squared errors, averaged over the batch."""
    return ((x - x_hat) ** 2).sum(dim=-1).mean()


LN2 = math.log(2.0)
