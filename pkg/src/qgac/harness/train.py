"""Desk-scale staged training: Y network first, then the colour network with Y frozen."""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..coeffs import NormalizationStats, default_stats, nn_upsample_coefficient_plane, normalize_plane, normalize_quant_matrix
from ..jpeg.codec import decode_jpeg_coefficients
from ..jpeg.color import rgb_image_to_ycbcr
from ..jpeg.dct import DCT_MATRIX
from ..losses import l_jpeg
from ..model.checkpoint import ModelCheckpoint
from ..model.networks import NetworkConfig, QGACNet
from ..nn import ops
from ..nn.optim import Adam, LrSchedule, lr_at
from ..nn.tensor import Tensor
from .patches import load_patch_pairs

log = logging.getLogger(__name__)


class TrainingDiverged(RuntimeError):
    pass


@dataclass
class TrainResult:
    checkpoint: ModelCheckpoint
    losses: list[dict] = field(default_factory=list)

    def curve(self, stage: str) -> list[float]:
        return [r["loss"] for r in self.losses if r["stage"] == stage]

    def write_csv(self, path):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            fh.write("# qgac loss curve v1\n")
            w = csv.DictWriter(fh, ["stage", "step", "lr", "loss"])
            w.writeheader()
            for r in self.losses:
                w.writerow({**r, "loss": repr(r["loss"]), "lr": repr(r["lr"])})


def _tile(vec: np.ndarray, shape) -> np.ndarray:
    return np.tile(vec.reshape(8, 8), (shape[-2] // 8, shape[-1] // 8))


def to_pixels(coeffs: Tensor) -> Tensor:
    """Differentiable blockwise inverse DCT to samples on [0, 1]."""
    return (ops.block_transform(coeffs, DCT_MATRIX.T) + 128.0) / 255.0


@dataclass
class _Batch:
    y_coeffs: np.ndarray  # (N, 1, H, W) dequantized
    y_target: np.ndarray  # (N, 1, H, W) on [0, 1]
    qy: np.ndarray
    c_coeffs: np.ndarray | None = None  # (2N, 1, H/2, W/2), Cb items then Cr items
    c_target: np.ndarray | None = None  # (2N, 1, H, W)
    qc: np.ndarray | None = None


def prepare_batch(pairs) -> _Batch:
    ys, yt, cs, ct = [], [], [], []
    qy = qc = None
    for _, original, data in pairs:
        img, quants = decode_jpeg_coefficients(data)
        h, w = original.shape[:2]
        if img.y.values.shape != (h, w):
            raise ValueError(f"patch {original.shape} is not a whole number of MCUs")
        qy = normalize_quant_matrix(quants[0])
        ys.append(img.y.values)
        if original.ndim == 2:
            yt.append(original / 255.0)
            continue
        ycc = rgb_image_to_ycbcr(original).astype(np.float64)
        yt.append(ycc[..., 0] / 255.0)
        if img.subsampling == "4:2:0":
            qc = normalize_quant_matrix(quants[1])
            cs.append((img.cb.values, img.cr.values))
            ct.append((ycc[..., 1] / 255.0, ycc[..., 2] / 255.0))
    batch = _Batch(np.stack(ys)[:, None], np.stack(yt)[:, None], qy)
    if cs and len(cs) == len(ys):
        batch.c_coeffs = np.stack([c[0] for c in cs] + [c[1] for c in cs])[:, None]
        batch.c_target = np.stack([t[0] for t in ct] + [t[1] for t in ct])[:, None]
        batch.qc = qc
    return batch


def _check(loss: Tensor, stage: str, step: int):
    if not math.isfinite(loss.item()):
        raise TrainingDiverged(f"{stage} loss became {loss.item()} at step {step}")


def y_loss(net: QGACNet, batch: _Batch, stats: NormalizationStats, dtype, lam: float) -> Tensor:
    x = Tensor(normalize_plane(batch.y_coeffs, stats, "Y").astype(dtype))
    res = net.y_residual(x, batch.qy.astype(dtype))
    coeffs = Tensor(batch.y_coeffs.astype(dtype)) + res * _tile(stats.std["Y"], x.shape).astype(dtype)
    return l_jpeg(to_pixels(coeffs), Tensor(batch.y_target.astype(dtype)), lam)


def color_loss(net: QGACNet, batch: _Batch, y_norm: np.ndarray, stats: NormalizationStats, dtype, lam: float, upsample_mode: str) -> Tensor:
    c = Tensor(normalize_plane(batch.c_coeffs, stats, "CbCr").astype(dtype))
    res = net.color_net(c, Tensor(y_norm.astype(dtype)), batch.qc.astype(dtype), batch.qy.astype(dtype))
    base = nn_upsample_coefficient_plane(batch.c_coeffs, upsample_mode)
    coeffs = Tensor(base.astype(dtype)) + res * _tile(stats.std["CbCr"], base.shape).astype(dtype)
    return l_jpeg(to_pixels(coeffs), Tensor(batch.c_target.astype(dtype)), lam)


def smoke_train(
    patch_dir,
    config: NetworkConfig | None = None,
    steps: int = 200,
    seed: int = 0,
    quality: int = 10,
    n_patches: int = 8,
    color_steps: int | None = None,
    lr: float = 1e-3,
    lam: float = 0.05,
    stats: NormalizationStats | None = None,
    dtype=np.float32,
    out_dir=None,
    upsample_mode: str = "pixel",
) -> TrainResult:
    """Train the Y network for ``steps`` full-batch Adam steps, then the colour
    network for ``color_steps`` (default ``steps``) with the Y weights frozen.

    Y uses step decay (halving every quarter of the run); colour uses cosine
    annealing down to 1e-6.
    """
    config = config or NetworkConfig.toy()
    stats = stats or default_stats()
    pairs = load_patch_pairs(patch_dir, quality, n_patches)
    if len(pairs) < n_patches:
        raise ValueError(f"need {n_patches} patches at quality {quality}, found {len(pairs)} in {patch_dir}")
    batch = prepare_batch(pairs)
    net = QGACNet(config, seed=seed).astype(dtype)
    result = TrainResult(checkpoint=None)

    y_sched = LrSchedule("step_decay", lr, min(lr, 1e-6), period=max(1, steps // 4))
    opt = Adam(net.y_parameters(), lr)
    for step in range(steps + 1):
        opt.zero_grad()
        loss = y_loss(net, batch, stats, dtype, lam)
        _check(loss, "y", step)
        rate = lr_at(y_sched, step)
        result.losses.append({"stage": "y", "step": step, "lr": rate, "loss": loss.item()})
        if step == steps:  # the last entry is the loss after the final update
            break
        loss.backward()
        opt.step(rate)
    log.info("y stage: loss %.6f -> %.6f", result.losses[0]["loss"], result.losses[-1]["loss"])

    color_steps = steps if color_steps is None else color_steps
    if batch.c_coeffs is not None and color_steps > 0:
        x = Tensor(normalize_plane(batch.y_coeffs, stats, "Y").astype(dtype))
        y_norm = net.y_forward(x, batch.qy.astype(dtype)).data
        y_norm = np.concatenate([y_norm, y_norm])
        c_sched = LrSchedule("cosine", lr, min(lr, 1e-6), total_steps=color_steps)
        opt = Adam(net.color_parameters(), lr)
        for step in range(color_steps + 1):
            opt.zero_grad()
            loss = color_loss(net, batch, y_norm, stats, dtype, lam, upsample_mode)
            _check(loss, "color", step)
            rate = lr_at(c_sched, step)
            result.losses.append({"stage": "color", "step": step, "lr": rate, "loss": loss.item()})
            if step == color_steps:
                break
            loss.backward()
            opt.step(rate)

    result.checkpoint = ModelCheckpoint.from_net(net.astype(np.float64), stats)
    if out_dir is not None:
        from ..model.checkpoint import save_checkpoint

        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        save_checkpoint(result.checkpoint, out / "smoke.ckpt")
        result.write_csv(out / "loss_curve.csv")
    return result
