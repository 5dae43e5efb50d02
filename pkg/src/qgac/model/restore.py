"""Inference: coefficient planes in, restored coefficient planes or pixels out."""

from __future__ import annotations

import numpy as np

from ..coeffs import NormalizationStats, nn_upsample_coefficient_plane, normalize_plane, normalize_quant_matrix
from ..jpeg.codec import decode_jpeg_coefficients, planes_to_pixels
from ..jpeg.tables import QuantMatrix
from ..nn.tensor import Tensor
from .checkpoint import CheckpointError, ModelCheckpoint
from .networks import QGACNet


def _net_and_stats(ckpt: ModelCheckpoint, role: str) -> tuple[QGACNet, NormalizationStats]:
    if ckpt.stats is None or role not in ckpt.stats.mean:
        raise CheckpointError(f"checkpoint has no normalization stats for {role}")
    return ckpt.build(), ckpt.stats


def _std_field(stats: NormalizationStats, role: str, shape) -> np.ndarray:
    return np.tile(stats.std[role].reshape(8, 8), (shape[0] // 8, shape[1] // 8))


def _as_input(plane: np.ndarray, net: QGACNet) -> Tensor:
    dtype = net.parameters()[0].dtype
    return Tensor(plane.astype(dtype)[None, None])


def y_restore(y_plane: np.ndarray, q_luma: QuantMatrix, ckpt: ModelCheckpoint) -> np.ndarray:
    """Restored luma coefficients on the same block grid."""
    y_plane = np.asarray(y_plane, dtype=np.float64)
    if y_plane.ndim != 2 or y_plane.shape[0] % 8 or y_plane.shape[1] % 8:
        raise ValueError(f"luma plane must be 2-D with dims multiple of 8, got {y_plane.shape}")
    net, stats = _net_and_stats(ckpt, "Y")
    x = _as_input(normalize_plane(y_plane, stats, "Y"), net)
    res = net.y_residual(x, normalize_quant_matrix(q_luma)).data[0, 0].astype(np.float64)
    # the residual lives in normalized units; scale back without the mean shift
    return y_plane + res * _std_field(stats, "Y", y_plane.shape)


def color_restore(
    c_plane: np.ndarray,
    y_restored: np.ndarray,
    q_chroma: QuantMatrix,
    q_luma: QuantMatrix,
    ckpt: ModelCheckpoint,
    upsample_mode: str = "pixel",
) -> np.ndarray:
    """Chroma coefficients at luma resolution."""
    c_plane = np.asarray(c_plane, dtype=np.float64)
    y_restored = np.asarray(y_restored, dtype=np.float64)
    if y_restored.shape != (2 * c_plane.shape[0], 2 * c_plane.shape[1]):
        raise ValueError(f"luma grid {y_restored.shape} must be twice the chroma grid {c_plane.shape}")
    net, stats = _net_and_stats(ckpt, "CbCr")
    stats.check("Y")
    c = _as_input(normalize_plane(c_plane, stats, "CbCr"), net)
    y = _as_input(normalize_plane(y_restored, stats, "Y"), net)
    res = net.color_net(c, y, normalize_quant_matrix(q_chroma), normalize_quant_matrix(q_luma))
    res = res.data[0, 0].astype(np.float64)
    base = nn_upsample_coefficient_plane(c_plane, upsample_mode)
    return base + res * _std_field(stats, "CbCr", base.shape)


def restore_image(data: bytes, ckpt: ModelCheckpoint) -> np.ndarray:
    """Decode and restore a baseline JPEG to 8-bit pixels (RGB or grayscale).

    Only 4:2:0 chroma goes through the colour network; other layouts keep
    their decoded chroma.
    """
    img, quants = decode_jpeg_coefficients(data)
    y = y_restore(img.y.values, quants[0], ckpt)
    if not img.is_color:
        return planes_to_pixels(img, [y])
    planes = [y]
    if img.subsampling == "4:2:0":
        for plane, q in zip((img.cb, img.cr), quants[1:]):
            planes.append(color_restore(plane.values, y, q, quants[0], ckpt))
    else:
        planes.extend([img.cb.values, img.cr.values])
    return planes_to_pixels(img, planes)
