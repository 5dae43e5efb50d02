"""Quantization-guided restoration networks, checkpoints and inference."""

from .checkpoint import (
    FORMAT_VERSION,
    CheckpointError,
    ModelCheckpoint,
    architecture_table,
    checkpoint_bytes,
    interpolate_params,
    load_checkpoint,
    save_checkpoint,
)
from .layers import CFM, RDB, RRDB, rearrange, unrearrange
from .networks import BlockNet, ColorNet, FrequencyNet, Fusion, NetworkConfig, QGACNet
from .restore import color_restore, restore_image, y_restore

__all__ = [
    "BlockNet",
    "CFM",
    "CheckpointError",
    "ColorNet",
    "FORMAT_VERSION",
    "FrequencyNet",
    "Fusion",
    "ModelCheckpoint",
    "NetworkConfig",
    "QGACNet",
    "RDB",
    "RRDB",
    "architecture_table",
    "checkpoint_bytes",
    "color_restore",
    "interpolate_params",
    "load_checkpoint",
    "rearrange",
    "restore_image",
    "save_checkpoint",
    "unrearrange",
    "y_restore",
]
