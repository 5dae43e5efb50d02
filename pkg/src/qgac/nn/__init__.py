"""Minimal deterministic tensor engine with reverse-mode gradients."""

from . import ops
from .module import Conv2d, Module, PReLU, kaiming, parameter
from .ops import ConvSpec, concat, concat_channels, conv2d, conv_transpose2d, prelu
from .optim import Adam, AdamState, LrSchedule, adam_step, lr_at
from .tensor import Tensor, as_tensor, backward

__all__ = [
    "Adam",
    "AdamState",
    "Conv2d",
    "ConvSpec",
    "LrSchedule",
    "Module",
    "PReLU",
    "Tensor",
    "adam_step",
    "as_tensor",
    "backward",
    "concat",
    "concat_channels",
    "conv2d",
    "conv_transpose2d",
    "kaiming",
    "lr_at",
    "ops",
    "parameter",
    "prelu",
]
