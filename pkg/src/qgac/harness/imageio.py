"""Reading lossless images and listing dataset directories."""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image

LOSSLESS_SUFFIXES = (".png", ".ppm", ".pgm", ".pnm", ".bmp", ".tif", ".tiff")


def read_image(path) -> np.ndarray:
    """(H, W, 3) uint8 RGB, or (H, W) for single-channel files."""
    with Image.open(path) as im:
        if im.mode in ("L", "I;16", "I", "F", "1"):
            return np.asarray(im.convert("L"))
        return np.asarray(im.convert("RGB"))


def write_png(path, image: np.ndarray):
    Image.fromarray(np.asarray(image, dtype=np.uint8)).save(path, format="PNG")


def list_images(directory) -> list[Path]:
    """Lossless images in a directory, sorted by file name."""
    d = Path(directory)
    if not d.is_dir():
        raise FileNotFoundError(f"dataset directory not found: {d}")
    return sorted(p for p in d.iterdir() if p.suffix.lower() in LOSSLESS_SUFFIXES)
