"""8x8 type-II/III DCT, quantization and zigzag ordering.

Plane-level helpers operate on every 8x8 block of an (H, W) array at once;
block (r, c) occupies rows 8r..8r+7 and columns 8c..8c+7.
"""

from __future__ import annotations

import numpy as np

from .tables import QuantMatrix


def _basis() -> np.ndarray:
    u = np.arange(8)[:, None]
    x = np.arange(8)[None, :]
    scale = np.where(u == 0, np.sqrt(0.125), 0.5)
    return scale * np.cos((2 * x + 1) * u * np.pi / 16)


#: DCT_MATRIX[u, x]; rows are the orthonormal cosine basis vectors.
DCT_MATRIX = _basis()
DCT_MATRIX.setflags(write=False)


def dct_forward_block(pixels: np.ndarray) -> np.ndarray:
    """Coefficients of one level-shifted 8x8 block."""
    pixels = np.asarray(pixels, dtype=np.float64)
    return DCT_MATRIX @ pixels @ DCT_MATRIX.T


def dct_inverse_block(coeffs: np.ndarray) -> np.ndarray:
    coeffs = np.asarray(coeffs, dtype=np.float64)
    return DCT_MATRIX.T @ coeffs @ DCT_MATRIX


def _as_blocks(plane: np.ndarray) -> np.ndarray:
    h, w = plane.shape[-2:]
    if h % 8 or w % 8:
        raise ValueError(f"plane dims must be multiples of 8, got {plane.shape}")
    return plane.reshape(*plane.shape[:-2], h // 8, 8, w // 8, 8)


def dct_plane(plane: np.ndarray) -> np.ndarray:
    """Blockwise forward DCT of an already centered plane."""
    blocks = _as_blocks(np.asarray(plane, dtype=np.float64))
    out = np.einsum("ux,...rxcy,vy->...rucv", DCT_MATRIX, blocks, DCT_MATRIX, optimize=True)
    return out.reshape(plane.shape)


def idct_plane(coeffs: np.ndarray) -> np.ndarray:
    blocks = _as_blocks(np.asarray(coeffs, dtype=np.float64))
    out = np.einsum("ux,...rucv,vy->...rxcy", DCT_MATRIX, blocks, DCT_MATRIX, optimize=True)
    return out.reshape(coeffs.shape)


def _tile(q: QuantMatrix | np.ndarray, shape) -> np.ndarray:
    entries = q.entries if isinstance(q, QuantMatrix) else np.asarray(q)
    return np.tile(entries, (shape[-2] // 8, shape[-1] // 8))


def quantize_block(coeffs: np.ndarray, q: QuantMatrix) -> np.ndarray:
    """Divide and truncate toward zero."""
    return np.trunc(np.asarray(coeffs, dtype=np.float64) / q.entries).astype(np.int32)


def dequantize_block(block: np.ndarray, q: QuantMatrix) -> np.ndarray:
    block = np.asarray(block)
    if not np.issubdtype(block.dtype, np.integer):
        raise TypeError(f"dequantize expects quantized integer coefficients, got {block.dtype}")
    return block.astype(np.float64) * q.entries


def quantize_plane(coeffs: np.ndarray, q: QuantMatrix) -> np.ndarray:
    coeffs = np.asarray(coeffs, dtype=np.float64)
    return np.trunc(coeffs / _tile(q, coeffs.shape)).astype(np.int32)


def dequantize_plane(quantized: np.ndarray, q: QuantMatrix) -> np.ndarray:
    quantized = np.asarray(quantized)
    if not np.issubdtype(quantized.dtype, np.integer):
        raise TypeError(f"dequantize expects quantized integer coefficients, got {quantized.dtype}")
    return quantized.astype(np.float64) * _tile(q, quantized.shape)


def _zigzag_order() -> np.ndarray:
    # walk anti-diagonals, alternating direction; even diagonals run bottom-left to top-right
    order = []
    for s in range(15):
        cells = [(i, s - i) for i in range(8) if 0 <= s - i < 8]
        if s % 2 == 0:
            cells.reverse()
        order.extend(i * 8 + j for i, j in cells)
    return np.array(order, dtype=np.intp)


#: ZIGZAG[k] is the raster index of the k-th coefficient in zigzag order.
ZIGZAG = _zigzag_order()
ZIGZAG.setflags(write=False)
#: UNZIGZAG[raster] is the zigzag position of a raster index.
UNZIGZAG = np.argsort(ZIGZAG)
UNZIGZAG.setflags(write=False)


def zigzag_scan(block: np.ndarray) -> np.ndarray:
    block = np.asarray(block)
    if block.shape[-2:] != (8, 8):
        raise ValueError(f"expected 8x8 block, got {block.shape}")
    return block.reshape(*block.shape[:-2], 64)[..., ZIGZAG]


def zigzag_unscan(vector: np.ndarray) -> np.ndarray:
    vector = np.asarray(vector)
    if vector.shape[-1] != 64:
        raise ValueError(f"expected a length-64 vector, got shape {vector.shape}")
    return vector[..., UNZIGZAG].reshape(*vector.shape[:-1], 8, 8)


def plane_to_blocks(plane: np.ndarray) -> np.ndarray:
    """(H, W) -> (H/8, W/8, 8, 8)."""
    return _as_blocks(np.asarray(plane)).swapaxes(-3, -2)


def blocks_to_plane(blocks: np.ndarray) -> np.ndarray:
    blocks = np.asarray(blocks)
    rows, cols = blocks.shape[-4:-2]
    return blocks.swapaxes(-3, -2).reshape(*blocks.shape[:-4], rows * 8, cols * 8)
