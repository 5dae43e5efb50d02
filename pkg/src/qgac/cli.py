"""Command-line entry point: ``qgac <subcommand> ...``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

from .harness.config import int_list, load_config

log = logging.getLogger("qgac")

DEFAULTS = {
    "quality": "75",
    "qualities": "10,20,30,40,50,60,70,80,90,100",
    "subsampling": "4:2:0",
    "seed": "0",
    "threads": "1",
    "metrics_convention": "rgb",
    "encoder": "native",
}


def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="key = value settings file; flags override it")
    p.add_argument("--quality", type=int)
    p.add_argument("--qualities", help="comma separated list")
    p.add_argument("--subsampling", choices=["4:2:0", "4:4:4"])
    p.add_argument("--checkpoint")
    p.add_argument("--seed", type=int)
    p.add_argument("--threads", type=int)
    p.add_argument("--metrics-convention", dest="metrics_convention", choices=["rgb", "y", "rgb-mean"])
    p.add_argument("--encoder", choices=["native", "libjpeg"])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qgac", description="JPEG coefficient codec and DCT-domain artifact correction")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("encode", help="compress a lossless image")
    p.add_argument("input")
    p.add_argument("output")
    _common(p)

    p = sub.add_parser("decode", help="decode (or restore, with --checkpoint) a JPEG to PNG")
    p.add_argument("input")
    p.add_argument("output")
    _common(p)

    p = sub.add_parser("inspect", help="print quantization tables and markers as JSON")
    p.add_argument("input")

    p = sub.add_parser("patches", help="extract a seeded patch corpus")
    p.add_argument("images", help="directory of lossless images")
    p.add_argument("output")
    p.add_argument("--patch-size", type=int, default=256)
    p.add_argument("--per-image", type=int, default=30)
    _common(p)

    for name, helptext in (("eval", "per-image metrics CSV"), ("curve", "PSNR improvement per quality CSV")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("inputs", nargs="*", help="dataset directories")
        p.add_argument("-o", "--output", help="CSV path (default: stdout)")
        _common(p)

    p = sub.add_parser("eqq", help="equivalent quality of a restoration")
    p.add_argument("original")
    p.add_argument("restored", nargs="?", help="restored image; omitted means restore with --checkpoint")
    p.add_argument("--start-quality", type=int, default=10)
    _common(p)

    p = sub.add_parser("freq", help="nonzero probability per anti-diagonal frequency group")
    p.add_argument("images", nargs="+", help="lossless images (recompressed) or .jpg files (used as is)")
    p.add_argument("--per-coefficient", action="store_true", help="64 raster-ordered frequencies instead of 15 groups")
    p.add_argument("-o", "--output")
    _common(p)

    p = sub.add_parser("smoke-train", help="train the toy network on a patch corpus")
    p.add_argument("patches")
    p.add_argument("output")
    p.add_argument("--steps", type=int, default=200)
    p.add_argument("--color-steps", type=int)
    p.add_argument("--n-patches", type=int, default=8)
    _common(p)

    p = sub.add_parser("interp", help="interpolate two checkpoints")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("output")
    p.add_argument("--alpha", type=float, required=True)

    p = sub.add_parser("report", help="summary CSV and SVG plots from an eval CSV")
    p.add_argument("records")
    p.add_argument("output")
    return parser


def _settings(args) -> dict:
    merged = dict(DEFAULTS)
    if getattr(args, "config", None):
        merged.update(load_config(args.config))
    for key in DEFAULTS.keys() | {"checkpoint"}:
        val = getattr(args, key, None)
        if val is not None:
            merged[key] = str(val)
    s = {
        "quality": int(merged["quality"]),
        "qualities": int_list(merged["qualities"]),
        "subsampling": merged["subsampling"],
        "seed": int(merged["seed"]),
        "threads": int(merged["threads"]),
        "convention": merged["metrics_convention"],
        "encoder": merged["encoder"],
        "checkpoint": merged.get("checkpoint"),
        "inputs": [v.strip() for v in merged.get("inputs", "").split(",") if v.strip()],
        "output": merged.get("output"),
    }
    return s


def _write_rows(rows: list[dict], fields: list[str], output, header: str):
    fh = open(output, "w", newline="", encoding="utf-8") if output else sys.stdout
    try:
        fh.write(header + "\n")
        w = csv.DictWriter(fh, fields)
        w.writeheader()
        for r in rows:
            w.writerow({k: repr(float(v)) if isinstance(v, float) else v for k, v in r.items()})
    finally:
        if output:
            fh.close()


def cmd_encode(args, s):
    from .harness.encoders import compress
    from .harness.imageio import read_image

    img = read_image(args.input)
    data = compress(img, s["quality"], s["subsampling"] if img.ndim == 3 else "4:4:4", s["encoder"])
    Path(args.output).write_bytes(data)
    log.info("wrote %s (%d bytes)", args.output, len(data))


def cmd_decode(args, s):
    from .harness.imageio import write_png
    from .jpeg import decode_jpeg_pixels

    data = Path(args.input).read_bytes()
    if s["checkpoint"]:
        from .model import load_checkpoint, restore_image

        pixels = restore_image(data, load_checkpoint(s["checkpoint"]))
    else:
        pixels = decode_jpeg_pixels(data)
    write_png(args.output, pixels)


def cmd_inspect(args, s):
    from .jpeg import inspect_jpeg

    print(json.dumps(inspect_jpeg(Path(args.input).read_bytes()), indent=2))


def cmd_patches(args, s):
    from .harness.imageio import list_images
    from .harness.patches import PatchSpec, extract_patches

    spec = PatchSpec(args.patch_size, args.per_image, s["qualities"], s["seed"], s["subsampling"], s["encoder"])
    m = extract_patches(list_images(args.images), spec, args.output, s["threads"])
    print(f"{m.original_count} originals, {m.jpeg_count} JPEGs, {len(m.skipped)} images skipped")


def _run_config(args, s):
    from .harness.evaluate import RunConfig

    inputs = args.inputs or s["inputs"]
    if not inputs:
        raise SystemExit("no dataset directories given")
    return RunConfig(
        inputs=inputs,
        output_dir=str(Path(args.output or ".").parent),
        checkpoint=s["checkpoint"],
        qualities=s["qualities"],
        convention=s["convention"],
        threads=s["threads"],
        seed=s["seed"],
        subsampling=s["subsampling"],
        encoder=s["encoder"],
    )


def cmd_eval(args, s):
    from .harness.evaluate import evaluate_dataset, write_records

    result = evaluate_dataset(_run_config(args, s))
    if args.output:
        write_records(result.records, args.output)
    else:
        from .harness.evaluate import RECORD_FIELDS, summarize

        _write_rows([{k: r[k] for k in RECORD_FIELDS if k in r} for r in summarize(result.records)], [k for k in RECORD_FIELDS if k != "image"], None, "# qgac evaluation summary v1")
    for f in result.failures:
        log.error("failed: %s/%s: %s", f["dataset"], f["image"], f["error"])
    return 1 if result.failures else 0


def cmd_curve(args, s):
    from .harness.evaluate import evaluate_dataset, improvement_curve

    cfg = _run_config(args, s)
    if cfg.checkpoint is None:
        raise SystemExit("curve needs --checkpoint")
    rows = improvement_curve(evaluate_dataset(cfg).records)
    _write_rows(rows, ["quality", "psnr_jpeg", "psnr_restored", "delta_psnr"], args.output, "# qgac improvement curve v1")


def cmd_eqq(args, s):
    from .harness.analysis import equivalent_quality
    from .harness.encoders import compress
    from .harness.imageio import read_image

    original = read_image(args.original)
    if args.restored:
        restored = read_image(args.restored)
    else:
        if not s["checkpoint"]:
            raise SystemExit("eqq needs a restored image or --checkpoint")
        from .model import load_checkpoint, restore_image

        data = compress(original, args.start_quality, s["subsampling"] if original.ndim == 3 else "4:4:4", s["encoder"])
        restored = restore_image(data, load_checkpoint(s["checkpoint"]))
    q, saved = equivalent_quality(original, restored, args.start_quality, s["subsampling"], s["encoder"], s["convention"])
    print(json.dumps({"start_quality": args.start_quality, "equivalent_quality": q if q is not None else "none", "bytes_delta": saved if saved is not None else "none"}))


def cmd_freq(args, s):
    from .harness.analysis import saturation_for_image, saturation_for_jpeg
    from .harness.imageio import read_image

    mode = "coefficient" if args.per_coefficient else "diagonal"
    n = 64 if args.per_coefficient else 15
    rows = []
    for path in sorted(args.images):
        p = Path(path)
        if p.suffix.lower() in (".jpg", ".jpeg"):
            probs = saturation_for_jpeg(p.read_bytes(), mode)
        else:
            probs = saturation_for_image(read_image(p), s["quality"], mode, s["subsampling"])
        rows.append({"image": p.name, **{f"f{k}": float(v) for k, v in enumerate(probs)}})
    _write_rows(rows, ["image"] + [f"f{k}" for k in range(n)], args.output, "# qgac frequency saturation v1")


def cmd_smoke_train(args, s):
    from .harness.train import smoke_train

    q = args.quality if args.quality is not None else 10
    r = smoke_train(args.patches, steps=args.steps, seed=s["seed"], quality=q, n_patches=args.n_patches, color_steps=args.color_steps, out_dir=args.output)
    y = r.curve("y")
    print(f"y loss {y[0]:.6f} -> {y[-1]:.6f}")
    c = r.curve("color")
    if c:
        print(f"color loss {c[0]:.6f} -> {c[-1]:.6f}")


def cmd_interp(args, s):
    from .model import interpolate_params, load_checkpoint, save_checkpoint

    save_checkpoint(interpolate_params(load_checkpoint(args.a), load_checkpoint(args.b), args.alpha), args.output)


def cmd_report(args, s):
    from .harness.report import report

    for name, path in report(args.records, args.output).items():
        print(f"{name}: {path}")


COMMANDS = {
    "encode": cmd_encode,
    "decode": cmd_decode,
    "inspect": cmd_inspect,
    "patches": cmd_patches,
    "eval": cmd_eval,
    "curve": cmd_curve,
    "eqq": cmd_eqq,
    "freq": cmd_freq,
    "smoke-train": cmd_smoke_train,
    "interp": cmd_interp,
    "report": cmd_report,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    from .jpeg import JpegError
    from .model import CheckpointError

    try:
        rc = COMMANDS[args.command](args, _settings(args))
    except (JpegError, CheckpointError, FileNotFoundError, ValueError) as exc:
        print(f"qgac {args.command}: error: {exc}", file=sys.stderr)
        return 2
    return int(rc or 0)


if __name__ == "__main__":
    sys.exit(main())
