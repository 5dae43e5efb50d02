"""Image quality metrics on 8-bit data: PSNR, PSNR-B and SSIM.

Inputs are (H, W) or (H, W, C) arrays on the [0, 255] scale. The colour
convention decides how multi-channel images are reduced:

``rgb``      PSNR over all samples jointly, SSIM averaged over channels,
             PSNR-B on the luma plane.
``y``        every metric on the luma plane.
``rgb-mean`` every metric computed per channel and averaged (PSNR-B too).
"""

from __future__ import annotations

import math

import numpy as np

PSNR_CAP = 100.0
CONVENTIONS = ("rgb", "y", "rgb-mean")


def _pair(x, y) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise ValueError(f"image shapes differ: {x.shape} vs {y.shape}")
    if x.ndim not in (2, 3):
        raise ValueError(f"expected (H, W) or (H, W, C), got {x.shape}")
    return x, y


def luma(image: np.ndarray) -> np.ndarray:
    """Full-range luma of an RGB image (unrounded); grayscale passes through."""
    image = np.asarray(image, dtype=np.float64)
    if image.ndim == 2:
        return image
    return 0.299 * image[..., 0] + 0.587 * image[..., 1] + 0.114 * image[..., 2]


def _psnr_from_mse(mse: float, peak: float = 255.0) -> float:
    if mse <= 0:
        return PSNR_CAP
    return min(PSNR_CAP, 10.0 * math.log10(peak * peak / mse))


def psnr(x, y) -> float:
    x, y = _pair(x, y)
    return _psnr_from_mse(float(np.mean((x - y) ** 2)))


def blocking_effect_factor(img: np.ndarray, block: int = 8) -> float:
    """Excess squared difference across block boundaries over other neighbours."""
    img = np.asarray(img, dtype=np.float64)
    h, w = img.shape
    dh = (img[:, :-1] - img[:, 1:]) ** 2  # horizontal neighbour pairs, column c | c+1
    dv = (img[:-1, :] - img[1:, :]) ** 2
    col_b = np.zeros(w - 1, dtype=bool)
    col_b[block - 1 :: block] = True
    row_b = np.zeros(h - 1, dtype=bool)
    row_b[block - 1 :: block] = True
    n_b = h * col_b.sum() + w * row_b.sum()
    n_bc = h * (~col_b).sum() + w * (~row_b).sum()
    d_b = (dh[:, col_b].sum() + dv[row_b, :].sum()) / n_b
    d_bc = (dh[:, ~col_b].sum() + dv[~row_b, :].sum()) / n_bc
    if d_b <= d_bc:
        return 0.0
    eta = math.log2(block) / math.log2(min(h, w))
    return eta * (d_b - d_bc)


def _psnr_b_plane(ref: np.ndarray, test: np.ndarray) -> float:
    if min(ref.shape) < 16:
        raise ValueError(f"PSNR-B needs at least 16x16 pixels, got {ref.shape}")
    mse = float(np.mean((ref - test) ** 2))
    return _psnr_from_mse(mse + blocking_effect_factor(test))


def psnr_b(reference, test, convention: str = "rgb") -> float:
    """PSNR with the blocking penalty measured on ``test``."""
    x, y = _pair(reference, test)
    if x.ndim == 2:
        return _psnr_b_plane(x, y)
    if convention == "rgb-mean":
        return float(np.mean([_psnr_b_plane(x[..., c], y[..., c]) for c in range(x.shape[2])]))
    _check_convention(convention)
    return _psnr_b_plane(luma(x), luma(y))


def _gaussian_window(size: int = 11, sigma: float = 1.5) -> np.ndarray:
    r = np.arange(size) - (size - 1) / 2
    g = np.exp(-(r**2) / (2 * sigma * sigma))
    return g / g.sum()


def _filter_valid(img: np.ndarray, g: np.ndarray) -> np.ndarray:
    k = len(g)
    rows = np.lib.stride_tricks.sliding_window_view(img, k, axis=0) @ g
    return np.lib.stride_tricks.sliding_window_view(rows, k, axis=1) @ g


def ssim_map(x: np.ndarray, y: np.ndarray, data_range: float = 255.0) -> np.ndarray:
    """Local SSIM at every position where the 11x11 window fits."""
    if min(x.shape) < 11:
        raise ValueError(f"SSIM needs at least 11x11 pixels, got {x.shape}")
    g = _gaussian_window()
    c1 = (0.01 * data_range) ** 2
    c2 = (0.03 * data_range) ** 2
    mx = _filter_valid(x, g)
    my = _filter_valid(y, g)
    sxx = _filter_valid(x * x, g) - mx * mx
    syy = _filter_valid(y * y, g) - my * my
    sxy = _filter_valid(x * y, g) - mx * my
    num = (2 * mx * my + c1) * (2 * sxy + c2)
    den = (mx * mx + my * my + c1) * (sxx + syy + c2)
    return num / den


def ssim(x, y, convention: str = "rgb", data_range: float = 255.0) -> float:
    x, y = _pair(x, y)
    if x.ndim == 2:
        return float(ssim_map(x, y, data_range).mean())
    _check_convention(convention)
    if convention == "y":
        return float(ssim_map(luma(x), luma(y), data_range).mean())
    return float(np.mean([ssim_map(x[..., c], y[..., c], data_range).mean() for c in range(x.shape[2])]))


def psnr_convention(x, y, convention: str = "rgb") -> float:
    x, y = _pair(x, y)
    if x.ndim == 2 or convention == "rgb":
        return psnr(x, y)
    _check_convention(convention)
    if convention == "y":
        return psnr(luma(x), luma(y))
    return float(np.mean([psnr(x[..., c], y[..., c]) for c in range(x.shape[2])]))


def _check_convention(convention: str):
    if convention not in CONVENTIONS:
        raise ValueError(f"metrics convention must be one of {CONVENTIONS}, got {convention!r}")


def all_metrics(reference, test, convention: str = "rgb") -> tuple[float, float, float]:
    """(PSNR, PSNR-B, SSIM) under one convention."""
    return (
        psnr_convention(reference, test, convention),
        psnr_b(reference, test, convention),
        ssim(reference, test, convention),
    )
