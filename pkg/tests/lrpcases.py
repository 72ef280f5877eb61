"""Conservation check shared by the unit tests and the acceptance run."""

import numpy as np
import torch

from ecgrev.interpret import lrp_batch
from ecgrev.models import DownstreamModel, EncoderRep, fresh_encoder
from ecgrev.nn import EncoderConfig

TINY_BIAS_FREE = EncoderConfig(stages=2, base_width=4, blocks_per_stage=1, kernel=5, rep_dim=64, stem_stride=4,
                               bias=False)


def bias_free_model(seed=0):
    enc = fresh_encoder(TINY_BIAS_FREE, seed)
    with torch.random.fork_rng(devices=[]):
        torch.manual_seed(seed + 1)
        head = torch.nn.Linear(TINY_BIAS_FREE.rep_dim, 1, bias=False)
    return DownstreamModel(EncoderRep(enc, "tiny"), head)


def conservation_errors(n=100, seed=0):
    rng = np.random.default_rng(seed)
    x = rng.random((n, 3000))
    r, logits = lrp_batch(bias_free_model(seed), x, rule="zero")
    return np.abs(r.sum(axis=1) - logits) / np.abs(logits)
