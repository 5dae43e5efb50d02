"""Seeded random patch corpora: lossless crops plus JPEGs at several qualities."""

from __future__ import annotations

import csv
import logging
import zlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .encoders import compress
from .imageio import read_image, write_png
from .parallel import map_ordered

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class PatchSpec:
    patch_size: int = 256
    patches_per_image: int = 30
    qualities: tuple[int, ...] = tuple(range(10, 101, 10))
    seed: int = 0
    subsampling: str = "4:2:0"
    encoder: str = "native"

    def __post_init__(self):
        if self.patch_size <= 0 or self.patch_size % 16:
            raise ValueError(f"patch size must be a positive multiple of 16, got {self.patch_size}")
        if self.patches_per_image <= 0:
            raise ValueError("patches_per_image must be positive")
        if not self.qualities or any(not 1 <= q <= 100 for q in self.qualities):
            raise ValueError(f"qualities must lie in [1, 100], got {self.qualities}")
        object.__setattr__(self, "qualities", tuple(int(q) for q in self.qualities))


def image_rng(seed: int, name: str) -> np.random.Generator:
    """PCG64 stream keyed by (seed, CRC-32 of the image name)."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, zlib.crc32(name.encode())])))


def crop_coordinates(shape: tuple[int, ...], spec: PatchSpec, name: str) -> list[tuple[int, int]]:
    h, w = shape[:2]
    rng = image_rng(spec.seed, name)
    ys = rng.integers(0, h - spec.patch_size + 1, size=spec.patches_per_image)
    xs = rng.integers(0, w - spec.patch_size + 1, size=spec.patches_per_image)
    return [(int(y), int(x)) for y, x in zip(ys, xs)]


@dataclass
class PatchManifest:
    rows: list[dict] = field(default_factory=list)
    skipped: list[dict] = field(default_factory=list)

    @property
    def jpeg_count(self) -> int:
        return sum(1 for r in self.rows if r["kind"] == "jpeg")

    @property
    def original_count(self) -> int:
        return sum(1 for r in self.rows if r["kind"] == "original")

    def write(self, path: Path):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            fh.write("# qgac patch manifest v1\n")
            w = csv.DictWriter(fh, ["kind", "image", "patch", "y", "x", "quality", "path", "note"])
            w.writeheader()
            for r in self.rows + self.skipped:
                w.writerow({k: r.get(k, "") for k in w.fieldnames})


def _patches_for(path: Path, spec: PatchSpec, out_dir: Path) -> tuple[list[dict], list[dict]]:
    img = read_image(path)
    name = path.stem
    if min(img.shape[:2]) < spec.patch_size:
        note = f"image {img.shape[1]}x{img.shape[0]} smaller than patch {spec.patch_size}"
        log.warning("skipping %s: %s", path.name, note)
        return [], [{"kind": "skipped", "image": name, "note": note}]
    rows = []
    for k, (y, x) in enumerate(crop_coordinates(img.shape, spec, name)):
        crop = img[y : y + spec.patch_size, x : x + spec.patch_size]
        stem = f"{name}_{k:03d}"
        orig = out_dir / "originals" / f"{stem}.png"
        write_png(orig, crop)
        base = {"image": name, "patch": k, "y": y, "x": x}
        rows.append({**base, "kind": "original", "quality": "", "path": str(orig.relative_to(out_dir))})
        for q in spec.qualities:
            jp = out_dir / f"q{q:03d}" / f"{stem}.jpg"
            jp.write_bytes(compress(crop, q, spec.subsampling, spec.encoder))
            rows.append({**base, "kind": "jpeg", "quality": q, "path": str(jp.relative_to(out_dir))})
    return rows, []


def extract_patches(images, spec: PatchSpec, out_dir, threads: int = 1) -> PatchManifest:
    """Write crops and their JPEGs under ``out_dir`` and a manifest.csv."""
    out_dir = Path(out_dir)
    (out_dir / "originals").mkdir(parents=True, exist_ok=True)
    for q in spec.qualities:
        (out_dir / f"q{q:03d}").mkdir(exist_ok=True)
    paths = sorted(Path(p) for p in images)
    manifest = PatchManifest()
    for rows, skipped in map_ordered(lambda p: _patches_for(p, spec, out_dir), paths, threads):
        manifest.rows.extend(rows)
        manifest.skipped.extend(skipped)
    manifest.write(out_dir / "manifest.csv")
    return manifest


def load_patch_pairs(patch_dir, quality: int, limit: int | None = None) -> list[tuple[str, np.ndarray, bytes]]:
    """(stem, original crop, JPEG bytes) for one quality, sorted by stem."""
    patch_dir = Path(patch_dir)
    qdir = patch_dir / f"q{quality:03d}"
    if not qdir.is_dir():
        raise FileNotFoundError(f"no patches at quality {quality} under {patch_dir}")
    out = []
    for jp in sorted(qdir.glob("*.jpg")):
        orig = patch_dir / "originals" / f"{jp.stem}.png"
        out.append((jp.stem, read_image(orig), jp.read_bytes()))
        if limit is not None and len(out) >= limit:
            break
    return out
