"""JPEG encoders used when building evaluation inputs.

``native`` is this package's encoder (truncating quantizer). ``libjpeg``
goes through Pillow, which rounds coefficients to the nearest level.
"""

from __future__ import annotations

import io

import numpy as np
from PIL import Image

from ..jpeg import encode_jpeg

ENCODERS = ("native", "libjpeg")


def compress(image: np.ndarray, quality: int, subsampling: str = "4:2:0", encoder: str = "native") -> bytes:
    if encoder == "native":
        return encode_jpeg(image, quality, subsampling)
    if encoder == "libjpeg":
        buf = io.BytesIO()
        sub = {"4:4:4": 0, "4:2:0": 2}[subsampling]
        Image.fromarray(np.asarray(image, dtype=np.uint8)).save(buf, format="JPEG", quality=quality, subsampling=sub)
        return buf.getvalue()
    raise ValueError(f"encoder must be one of {ENCODERS}, got {encoder!r}")
