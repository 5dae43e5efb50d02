"""Equivalent-quality search and DCT frequency saturation statistics."""

from __future__ import annotations

import numpy as np

from ..coeffs import frequency_saturation
from ..jpeg import decode_jpeg_pixels, read_jpeg
from ..metrics import ssim
from .encoders import compress


def equivalent_quality(
    original: np.ndarray,
    restored: np.ndarray,
    start_quality: int,
    subsampling: str = "4:2:0",
    encoder: str = "native",
    convention: str = "rgb",
) -> tuple[int | None, int | None]:
    """First quality >= start whose JPEG SSIM reaches the restoration's.

    Returns ``(quality, bytes(q) - bytes(start))`` or ``(None, None)`` when no
    quality up to 100 qualifies.
    """
    if not 1 <= start_quality <= 100:
        raise ValueError(f"start quality must be in [1, 100], got {start_quality}")
    if original.ndim == 2:
        subsampling = "4:4:4"
    target = ssim(original, restored, convention)
    start_bytes = len(compress(original, start_quality, subsampling, encoder))
    for q in range(start_quality, 101):
        data = compress(original, q, subsampling, encoder)
        if ssim(original, decode_jpeg_pixels(data), convention) >= target:
            return q, len(data) - start_bytes
    return None, None


def saturation_for_jpeg(data: bytes, mode: str = "diagonal") -> np.ndarray:
    """Nonzero probabilities of the luma coefficients stored in a JPEG."""
    return frequency_saturation(read_jpeg(data).y.values, mode)


def saturation_for_image(image: np.ndarray, quality: int, mode: str = "diagonal", subsampling: str = "4:2:0") -> np.ndarray:
    if image.ndim == 2:
        subsampling = "4:4:4"
    return saturation_for_jpeg(compress(image, quality, subsampling), mode)
