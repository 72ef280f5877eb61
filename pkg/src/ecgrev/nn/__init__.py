"""Differentiable core: residual 1-D encoder, heads, losses, optimizer, checkpoints."""

from .checkpoint import CheckpointError, load_checkpoint, save_checkpoint
from .encoder import Decoder, Encoder, EncoderConfig, ResidualBlock, backward, encoder_forward
from .losses import bce_multilabel_loss, ntxent_loss, ntxent_pairing, reconstruction_loss, softmax_ce_loss
from .optim import OptimState, Optimizer, adam_step

__all__ = [
    "CheckpointError", "load_checkpoint", "save_checkpoint",
    "Decoder", "Encoder", "EncoderConfig", "ResidualBlock", "backward", "encoder_forward",
    "bce_multilabel_loss", "ntxent_loss", "ntxent_pairing", "reconstruction_loss", "softmax_ce_loss",
    "OptimState", "Optimizer", "adam_step",
]
