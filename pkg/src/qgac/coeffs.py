"""DCT-domain data preparation for the network.

Coefficient planes are (..., H, W) arrays with 8x8 blocks in place. The 64
frequencies inside a block are indexed in raster order ``i * 8 + j``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .jpeg.dct import dct_plane, idct_plane
from .jpeg.tables import QuantMatrix

STD_FLOOR = 1e-6
ROLES = ("Y", "CbCr")


@dataclass
class NormalizationStats:
    """Per-frequency mean/std for each channel role, in coefficient units."""

    mean: dict[str, np.ndarray]
    std: dict[str, np.ndarray]

    def __post_init__(self):
        for role in self.mean:
            m = np.asarray(self.mean[role], dtype=np.float64).reshape(64)
            s = np.asarray(self.std[role], dtype=np.float64).reshape(64)
            if (s <= 0).any():
                raise ValueError(f"std for role {role} must be positive")
            self.mean[role] = m
            self.std[role] = s

    def roles(self) -> list[str]:
        return sorted(self.mean)

    def check(self, role: str):
        if role not in self.mean:
            raise ValueError(f"no normalization stats for role {role!r}; have {self.roles()}")

    def to_dict(self) -> dict:
        return {r: {"mean": self.mean[r].tolist(), "std": self.std[r].tolist()} for r in self.roles()}

    @classmethod
    def from_dict(cls, d: dict) -> NormalizationStats:
        return cls({r: np.array(v["mean"]) for r, v in d.items()}, {r: np.array(v["std"]) for r, v in d.items()})

    def merged(self, other: NormalizationStats) -> NormalizationStats:
        mean = dict(self.mean)
        std = dict(self.std)
        mean.update(other.mean)
        std.update(other.std)
        return NormalizationStats(mean, std)


def default_stats() -> NormalizationStats:
    """Statistics fitted on a small set of public photographs, for demos."""
    text = resources.files("qgac").joinpath("data/default_stats.json").read_text()
    return NormalizationStats.from_dict(json.loads(text))


def _blocks64(plane: np.ndarray) -> np.ndarray:
    """All blocks of a plane as rows of 64 raster-ordered coefficients."""
    return rearrange_frequencies(plane).reshape(*np.shape(plane)[:-2], 64, -1).swapaxes(-1, -2).reshape(-1, 64)


def compute_normalization_stats(corpus, role: str) -> NormalizationStats:
    """Mean/std per frequency over every block of every plane in ``corpus``."""
    if role not in ROLES:
        raise ValueError(f"role must be one of {ROLES}, got {role!r}")
    planes = [np.asarray(getattr(p, "values", p), dtype=np.float64) for p in corpus]
    if not planes:
        raise ValueError("cannot compute statistics of an empty corpus")
    blocks = np.concatenate([_blocks64(p) for p in planes])
    mean = blocks.mean(axis=0)
    std = np.maximum(blocks.std(axis=0), STD_FLOOR)
    return NormalizationStats({role: mean}, {role: std})


def _field(stats_vec: np.ndarray, shape) -> np.ndarray:
    return np.tile(stats_vec.reshape(8, 8), (shape[-2] // 8, shape[-1] // 8))


def normalize_plane(plane: np.ndarray, stats: NormalizationStats, role: str) -> np.ndarray:
    stats.check(role)
    plane = np.asarray(plane, dtype=np.float64)
    return (plane - _field(stats.mean[role], plane.shape)) / _field(stats.std[role], plane.shape)


def denormalize_plane(plane: np.ndarray, stats: NormalizationStats, role: str) -> np.ndarray:
    stats.check(role)
    plane = np.asarray(plane, dtype=np.float64)
    return plane * _field(stats.std[role], plane.shape) + _field(stats.mean[role], plane.shape)


def normalize_quant_matrix(q: QuantMatrix | np.ndarray) -> np.ndarray:
    """Divisors scaled to [0, 1]; 1 is the coarsest quantization."""
    entries = q.entries if isinstance(q, QuantMatrix) else np.asarray(q)
    return entries.astype(np.float64) / 255.0


def rearrange_frequencies(plane: np.ndarray) -> np.ndarray:
    """(..., H, W) -> (..., 64, H/8, W/8); channel k holds frequency (k // 8, k % 8)."""
    plane = np.asarray(plane)
    h, w = plane.shape[-2:]
    if h % 8 or w % 8:
        raise ValueError(f"plane dims must be multiples of 8, got {plane.shape}")
    lead = plane.shape[:-2]
    x = plane.reshape(*lead, h // 8, 8, w // 8, 8)
    n = len(lead)
    x = x.transpose(*range(n), n + 1, n + 3, n, n + 2)
    return x.reshape(*lead, 64, h // 8, w // 8)


def unrearrange_frequencies(r: np.ndarray) -> np.ndarray:
    r = np.asarray(r)
    if r.shape[-3] != 64:
        raise ValueError(f"expected 64 frequency channels, got {r.shape}")
    lead = r.shape[:-3]
    hb, wb = r.shape[-2:]
    n = len(lead)
    x = r.reshape(*lead, 8, 8, hb, wb).transpose(*range(n), n + 2, n, n + 3, n + 1)
    return x.reshape(*lead, hb * 8, wb * 8)


def nn_upsample_coefficient_plane(plane: np.ndarray, mode: str = "block") -> np.ndarray:
    """Double the block grid of a coefficient plane.

    ``mode="block"`` copies every block into a 2x2 neighbourhood.
    ``mode="pixel"`` upsamples the decoded samples by nearest-neighbour
    replication and re-transforms, so it agrees with pixel-domain chroma
    upsampling (restoration uses this one).
    """
    plane = np.asarray(plane, dtype=np.float64)
    if mode == "block":
        r = rearrange_frequencies(plane)
        r = np.repeat(np.repeat(r, 2, axis=-2), 2, axis=-1)
        return unrearrange_frequencies(r)
    if mode == "pixel":
        pixels = idct_plane(plane)
        pixels = np.repeat(np.repeat(pixels, 2, axis=-2), 2, axis=-1)
        return dct_plane(pixels)
    raise ValueError(f"mode must be 'pixel' or 'block', got {mode!r}")


def frequency_saturation(plane: np.ndarray, mode: str = "diagonal") -> np.ndarray:
    """Fraction of coefficients with nonzero magnitude per frequency group.

    ``mode="diagonal"`` groups by anti-diagonal i + j (15 groups);
    ``mode="coefficient"`` returns all 64 raster-ordered frequencies.
    """
    blocks = _blocks64(np.asarray(plane))
    per_freq = (np.abs(blocks) > 0).mean(axis=0) if blocks.size else np.zeros(64)
    if mode == "coefficient":
        return per_freq
    if mode != "diagonal":
        raise ValueError(f"mode must be 'diagonal' or 'coefficient', got {mode!r}")
    diag = (np.arange(64) // 8) + (np.arange(64) % 8)
    counts = np.bincount(diag, minlength=15)
    return np.bincount(diag, weights=per_freq, minlength=15) / counts
