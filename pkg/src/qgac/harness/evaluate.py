"""Dataset evaluation runs producing per-image metric records."""

from __future__ import annotations

import csv
import logging
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from ..jpeg import JpegError, decode_jpeg_pixels
from ..metrics import all_metrics
from ..model.checkpoint import ModelCheckpoint, load_checkpoint
from ..model.restore import restore_image
from .encoders import compress
from .imageio import list_images, read_image
from .parallel import map_ordered

log = logging.getLogger(__name__)

CSV_VERSION = "# qgac evaluation records v1"


@dataclass(frozen=True)
class EvaluationRecord:
    dataset: str
    image: str
    quality: int
    variant: str
    psnr: float
    psnr_b: float
    ssim: float
    jpeg_bytes: int

    def sort_key(self):
        return (self.dataset, self.image, self.quality, self.variant)


RECORD_FIELDS = [f.name for f in fields(EvaluationRecord)]


@dataclass
class RunConfig:
    inputs: list[str] = field(default_factory=list)
    output_dir: str = "out"
    checkpoint: str | None = None
    qualities: tuple[int, ...] = (10, 20, 30, 40, 50, 60, 70, 80, 90, 100)
    convention: str = "rgb"
    threads: int = 1
    seed: int = 0
    subsampling: str = "4:2:0"
    encoder: str = "native"

    def validate(self):
        for d in self.inputs:
            if not Path(d).is_dir():
                raise FileNotFoundError(f"input directory does not exist: {d}")
        if self.checkpoint is not None and not Path(self.checkpoint).is_file():
            raise FileNotFoundError(f"checkpoint does not exist: {self.checkpoint}")


@dataclass
class EvaluationResult:
    records: list[EvaluationRecord]
    failures: list[dict]

    def summary(self) -> list[dict]:
        return summarize(self.records)


def evaluate_image(
    image: np.ndarray,
    name: str,
    dataset: str,
    qualities,
    ckpt: ModelCheckpoint | None = None,
    convention: str = "rgb",
    subsampling: str = "4:2:0",
    encoder: str = "native",
) -> list[EvaluationRecord]:
    out = []
    for q in qualities:
        data = compress(image, q, subsampling if image.ndim == 3 else "4:4:4", encoder)
        decoded = decode_jpeg_pixels(data)
        out.append(EvaluationRecord(dataset, name, q, "jpeg", *all_metrics(image, decoded, convention), len(data)))
        if ckpt is not None:
            restored = restore_image(data, ckpt)
            out.append(EvaluationRecord(dataset, name, q, "restored", *all_metrics(image, restored, convention), len(data)))
    return out


def evaluate_dataset(config: RunConfig) -> EvaluationResult:
    """Every image of every input directory at every quality.

    Images that fail to read or decode are listed in ``failures``; the run
    continues with the rest.
    """
    config.validate()
    ckpt = load_checkpoint(config.checkpoint) if config.checkpoint else None
    if ckpt is not None:
        ckpt.build()  # build once before worker threads share it
    jobs = []
    for d in config.inputs:
        dataset = Path(d).name
        jobs.extend((dataset, p) for p in list_images(d))

    def run(job):
        dataset, path = job
        try:
            img = read_image(path)
            return evaluate_image(img, path.stem, dataset, config.qualities, ckpt, config.convention, config.subsampling, config.encoder), None
        except (OSError, JpegError, ValueError) as exc:
            log.warning("evaluation failed for %s: %s", path, exc)
            return [], {"dataset": dataset, "image": path.stem, "error": str(exc)}

    records, failures = [], []
    for recs, fail in map_ordered(run, jobs, config.threads):
        records.extend(recs)
        if fail:
            failures.append(fail)
    records.sort(key=EvaluationRecord.sort_key)
    return EvaluationResult(records, failures)


def summarize(records) -> list[dict]:
    """Unweighted per-(dataset, quality, variant) means, sorted."""
    groups: dict[tuple, list[EvaluationRecord]] = {}
    for r in records:
        groups.setdefault((r.dataset, r.quality, r.variant), []).append(r)
    rows = []
    for (dataset, q, variant), rs in sorted(groups.items()):
        rows.append(
            {
                "dataset": dataset,
                "quality": q,
                "variant": variant,
                "count": len(rs),
                "psnr": float(np.mean([r.psnr for r in rs])),
                "psnr_b": float(np.mean([r.psnr_b for r in rs])),
                "ssim": float(np.mean([r.ssim for r in rs])),
                "jpeg_bytes": float(np.mean([r.jpeg_bytes for r in rs])),
            }
        )
    return rows


def write_records(records, path, summary: bool = True):
    """Per-image rows, then mean rows with image ``*mean*``."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(CSV_VERSION + "\n")
        w = csv.DictWriter(fh, RECORD_FIELDS)
        w.writeheader()
        for r in records:
            w.writerow({k: repr(float(v)) if isinstance(v, float) else v for k, v in asdict(r).items()})
        if summary:
            for s in summarize(records):
                row = {k: s[k] for k in RECORD_FIELDS if k in s}
                row["image"] = "*mean*"
                w.writerow({k: repr(float(v)) if isinstance(v, float) else v for k, v in row.items()})


def read_records(path) -> list[EvaluationRecord]:
    """Per-image rows of a records CSV (mean rows are skipped)."""
    with open(path, newline="", encoding="utf-8") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    reader = csv.DictReader(lines)
    missing = [c for c in RECORD_FIELDS if c not in (reader.fieldnames or [])]
    if missing:
        raise ValueError(f"records CSV lacks column(s): {', '.join(missing)}")
    out = []
    for i, row in enumerate(reader, start=2):
        if row["image"] == "*mean*":
            continue
        try:
            out.append(
                EvaluationRecord(
                    row["dataset"],
                    row["image"],
                    int(row["quality"]),
                    row["variant"],
                    float(row["psnr"]),
                    float(row["psnr_b"]),
                    float(row["ssim"]),
                    int(float(row["jpeg_bytes"])),
                )
            )
        except ValueError as exc:
            raise ValueError(f"records CSV row {i}: {exc}") from exc
    return out


def improvement_curve(records) -> list[dict]:
    """Mean PSNR(restored) - PSNR(jpeg) per quality."""
    by_q: dict[int, dict[str, list[float]]] = {}
    for r in records:
        by_q.setdefault(r.quality, {}).setdefault(r.variant, []).append(r.psnr)
    rows = []
    for q in sorted(by_q):
        jp = by_q[q].get("jpeg", [])
        rs = by_q[q].get("restored", [])
        if not jp or not rs:
            continue
        rows.append({"quality": q, "psnr_jpeg": float(np.mean(jp)), "psnr_restored": float(np.mean(rs)), "delta_psnr": float(np.mean(rs) - np.mean(jp))})
    return rows
