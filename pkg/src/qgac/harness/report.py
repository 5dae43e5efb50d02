"""Summary tables and SVG plots from evaluation records."""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .evaluate import improvement_curve, read_records, summarize  # noqa: E402

SUMMARY_FIELDS = ["dataset", "quality", "variant", "count", "psnr", "psnr_b", "ssim", "jpeg_bytes", "formatted"]


def format_triple(row: dict) -> str:
    return f"{row['psnr']:.2f} / {row['psnr_b']:.2f} / {row['ssim']:.3f}"


def report(records_csv, out_dir) -> dict[str, Path]:
    """Write summary.csv plus one SVG per dataset (and an improvement plot)."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    records = read_records(records_csv)
    rows = summarize(records)
    written = {}
    summary = out_dir / "summary.csv"
    with open(summary, "w", newline="", encoding="utf-8") as fh:
        fh.write("# qgac summary v1\n")
        w = csv.DictWriter(fh, SUMMARY_FIELDS)
        w.writeheader()
        for r in rows:
            w.writerow({**{k: repr(float(v)) if isinstance(v, float) else v for k, v in r.items()}, "formatted": format_triple(r)})
    written["summary"] = summary

    for dataset in sorted({r["dataset"] for r in rows}):
        fig, ax = plt.subplots(figsize=(5, 3.5))
        for variant in ("jpeg", "restored"):
            part = [r for r in rows if r["dataset"] == dataset and r["variant"] == variant]
            if not part:
                continue
            ax.plot([r["quality"] for r in part], [r["psnr"] for r in part], marker="o", label=variant)
        ax.set_xlabel("JPEG quality")
        ax.set_ylabel("PSNR (dB)")
        ax.set_title(dataset)
        ax.legend()
        path = out_dir / f"psnr_{dataset}.svg"
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
        written[f"psnr_{dataset}"] = path

    curve = improvement_curve(records)
    if curve:
        fig, ax = plt.subplots(figsize=(5, 3.5))
        ax.bar([r["quality"] for r in curve], [r["delta_psnr"] for r in curve], width=6)
        ax.set_xlabel("JPEG quality")
        ax.set_ylabel("PSNR gain (dB)")
        path = out_dir / "improvement.svg"
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
        written["improvement"] = path
    return written
