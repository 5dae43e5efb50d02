"""Full-range YCbCr conversion, MCU padding and 2x chroma resampling.

Planes are plain numpy arrays indexed ``[row, col]``. The conversion matrix is
the JFIF one (0.299 R + 0.587 G + 0.114 B for luma).
"""

from __future__ import annotations

import numpy as np


def round_half_away(x: np.ndarray) -> np.ndarray:
    return np.sign(x) * np.floor(np.abs(x) + 0.5)


def to_uint8(x: np.ndarray) -> np.ndarray:
    return np.clip(round_half_away(x), 0, 255).astype(np.uint8)


def _check_planes(a, b, c):
    a, b, c = (np.asarray(p) for p in (a, b, c))
    if not (a.shape == b.shape == c.shape) or a.ndim != 2:
        raise ValueError(f"planes must be 2-D and equal-sized, got {a.shape}, {b.shape}, {c.shape}")
    return a.astype(np.float64), b.astype(np.float64), c.astype(np.float64)


def rgb_to_ycbcr_float(r, g, b):
    r, g, b = _check_planes(r, g, b)
    y = 0.299 * r + 0.587 * g + 0.114 * b
    cb = 128.0 - 0.168736 * r - 0.331264 * g + 0.5 * b
    cr = 128.0 + 0.5 * r - 0.418688 * g - 0.081312 * b
    return y, cb, cr


def ycbcr_to_rgb_float(y, cb, cr):
    y, cb, cr = _check_planes(y, cb, cr)
    cb = cb - 128.0
    cr = cr - 128.0
    r = y + 1.402 * cr
    g = y - 0.344136 * cb - 0.714136 * cr
    b = y + 1.772 * cb
    return r, g, b


def rgb_to_ycbcr(r, g, b):
    """Convert three 8-bit planes; results are rounded and clamped to [0, 255]."""
    return tuple(to_uint8(p) for p in rgb_to_ycbcr_float(r, g, b))


def ycbcr_to_rgb(y, cb, cr):
    return tuple(to_uint8(p) for p in ycbcr_to_rgb_float(y, cb, cr))


def rgb_image_to_ycbcr(image: np.ndarray) -> np.ndarray:
    """(H, W, 3) RGB -> (H, W, 3) YCbCr, both uint8."""
    return np.stack(rgb_to_ycbcr(image[..., 0], image[..., 1], image[..., 2]), axis=-1)


def ycbcr_image_to_rgb(image: np.ndarray) -> np.ndarray:
    return np.stack(ycbcr_to_rgb(image[..., 0], image[..., 1], image[..., 2]), axis=-1)


def pad_to_mcu(plane: np.ndarray, mcu: int) -> np.ndarray:
    """Replicate the last row/column until both dims are multiples of ``mcu``."""
    if mcu not in (8, 16):
        raise ValueError(f"mcu must be 8 or 16, got {mcu}")
    plane = np.asarray(plane)
    if plane.ndim != 2 or plane.size == 0:
        raise ValueError(f"cannot pad an empty or non-2-D plane of shape {plane.shape}")
    h, w = plane.shape
    ph = -h % mcu
    pw = -w % mcu
    if ph == 0 and pw == 0:
        return plane.copy()
    return np.pad(plane, ((0, ph), (0, pw)), mode="edge")


def subsample_chroma(plane: np.ndarray) -> np.ndarray:
    """Halve both dims; each output sample is the rounded mean of a 2x2 box."""
    plane = np.asarray(plane)
    h, w = plane.shape
    if h % 2 or w % 2:
        raise ValueError(f"subsampling needs even dims, got {plane.shape}; pad first")
    boxes = plane.astype(np.int64).reshape(h // 2, 2, w // 2, 2).sum(axis=(1, 3))
    # sums are non-negative, so half-away-from-zero is floor((s + 2) / 4)
    return np.clip((boxes + 2) // 4, 0, 255).astype(np.uint8)


def upsample_chroma(plane: np.ndarray, fy: int = 2, fx: int = 2) -> np.ndarray:
    """Nearest-neighbour replication by integer factors."""
    plane = np.asarray(plane)
    if plane.size == 0:
        raise ValueError("cannot upsample an empty plane")
    return np.repeat(np.repeat(plane, fy, axis=0), fx, axis=1)
