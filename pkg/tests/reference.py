"""Independent reference decoding through libjpeg (via jpeglib)."""

import os
import tempfile

import jpeglib
import numpy as np

from qgac.jpeg import read_jpeg
from qgac.jpeg.codec import coefficients_to_samples
from qgac.jpeg.color import upsample_chroma

# libjpeg otherwise interpolates chroma ("fancy" upsampling); our decoder replicates
_FLAGS = ["-DO_FANCY_UPSAMPLING"]


def _with_file(data: bytes, fn):
    fd, path = tempfile.mkstemp(suffix=".jpg")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        return fn(path)
    finally:
        os.unlink(path)


def reference_coefficients(data: bytes) -> list[np.ndarray]:
    """Quantized planes as libjpeg stores them, as (rows*8, cols*8) arrays."""

    def load(path):
        d = jpeglib.read_dct(path)
        arrays = [d.Y] + ([d.Cb, d.Cr] if d.has_chrominance else [])
        out = []
        for a in arrays:
            r, c = a.shape[:2]
            out.append(a.transpose(0, 2, 1, 3).reshape(r * 8, c * 8).astype(np.int32))
        return out

    return _with_file(data, load)


def reference_samples(data: bytes, color_space) -> np.ndarray:
    """Integer-IDCT decode with replicated chroma, in the requested colour space."""

    def load(path):
        img = jpeglib.read_spatial(path, out_color_space=color_space, dct_method=jpeglib.JDCT_ISLOW, flags=_FLAGS)
        return img.spatial

    return _with_file(data, load)


def our_component_samples(data: bytes) -> np.ndarray:
    """Our decoded Y/Cb/Cr samples after chroma upsampling, cropped, (H, W, C)."""
    img = read_jpeg(data)
    comps = []
    for p, (h, v) in zip(img.planes, img.sampling):
        s = coefficients_to_samples(p.dequantized().values)
        hy, vy = img.sampling[0]
        if (h, v) != (hy, vy):
            s = upsample_chroma(s, vy // v, hy // h)
        comps.append(s[: img.height, : img.width])
    return np.stack(comps, axis=-1)


def coefficients_match(data: bytes) -> bool:
    """Our quantized planes agree bit for bit with libjpeg's.

    libjpeg sizes each component's block grid by ceil(dim / 8) while ours
    covers whole MCUs, so the comparison is over libjpeg's grid.
    """
    ours = [p.values for p in read_jpeg(data).planes]
    ref = reference_coefficients(data)
    if len(ours) != len(ref):
        return False
    for a, b in zip(ours, ref):
        h, w = b.shape
        if a.shape[0] < h or a.shape[1] < w or not np.array_equal(a[:h, :w], b):
            return False
    return True
