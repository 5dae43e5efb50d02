"""Fit the bundled per-frequency normalization statistics.

Uses the photographs shipped with scikit-image. Y statistics come from the
full-resolution luma DCT, CbCr statistics from 4:2:0 subsampled chroma.
"""

import json
import sys
from pathlib import Path

import numpy as np
from skimage import data

from qgac.coeffs import compute_normalization_stats
from qgac.jpeg.color import pad_to_mcu, rgb_image_to_ycbcr, subsample_chroma
from qgac.jpeg.dct import dct_plane

COLOR = ["astronaut", "chelsea", "coffee", "rocket", "immunohistochemistry", "hubble_deep_field", "retina"]
GRAY = ["camera", "brick", "grass", "gravel", "moon", "coins", "clock"]


def main(out: Path):
    y_planes, c_planes = [], []
    colour = [getattr(data, name)()[..., :3] for name in COLOR]
    colour.extend(data.stereo_motorcycle()[:2])
    for rgb in colour:
        ycc = rgb_image_to_ycbcr(rgb)
        y = pad_to_mcu(ycc[..., 0], 16)
        y_planes.append(dct_plane(y.astype(np.float64) - 128))
        for k in (1, 2):
            c = subsample_chroma(pad_to_mcu(ycc[..., k], 16))
            c_planes.append(dct_plane(c.astype(np.float64) - 128))
    for name in GRAY:
        y = pad_to_mcu(getattr(data, name)(), 8)
        y_planes.append(dct_plane(y.astype(np.float64) - 128))
    stats = compute_normalization_stats(y_planes, "Y").merged(compute_normalization_stats(c_planes, "CbCr"))
    out.write_text(json.dumps(stats.to_dict(), indent=1) + "\n")
    print(f"wrote {out}")


if __name__ == "__main__":
    main(Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).parents[1] / "src/qgac/data/default_stats.json")
