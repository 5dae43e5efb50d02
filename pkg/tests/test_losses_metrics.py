"""Evaluation metrics and differentiable training objectives."""

import math

import numpy as np
import pytest
from skimage.metrics import structural_similarity

from corpus import photograph
from gradcheck import check
from qgac.jpeg import decode_jpeg_pixels, encode_jpeg
from qgac.losses import (
    LossWeights,
    gan_total_loss,
    identity_extractor,
    l_jpeg,
    mean_l1,
    random_conv_extractor,
    ragan_generator_loss,
    ssim_tensor,
    texture_loss,
)
from qgac.metrics import PSNR_CAP, all_metrics, blocking_effect_factor, luma, psnr, psnr_b, psnr_convention, ssim
from qgac.nn import Tensor

LOG2 = math.log(2.0)


def naive_bef(img, block=8):
    """Blocking effect factor by enumerating every neighbour pair."""
    h, w = img.shape
    sums = {True: 0.0, False: 0.0}
    counts = {True: 0, False: 0}
    for r in range(h):
        for c in range(w - 1):
            on = (c + 1) % block == 0
            sums[on] += (img[r, c] - img[r, c + 1]) ** 2
            counts[on] += 1
    for r in range(h - 1):
        for c in range(w):
            on = (r + 1) % block == 0
            sums[on] += (img[r, c] - img[r + 1, c]) ** 2
            counts[on] += 1
    d_b = sums[True] / counts[True]
    d_bc = sums[False] / counts[False]
    eta = math.log2(block) / math.log2(min(h, w))
    return eta * max(0.0, d_b - d_bc)


# --- PSNR ---------------------------------------------------------------------


def test_psnr_examples(rng):
    x = rng.integers(1, 255, (20, 30, 3))
    assert psnr(x, x) == PSNR_CAP
    assert abs(psnr(x, x + rng.choice([-1, 1], x.shape)) - 20 * math.log10(255)) < 1e-12
    assert abs(20 * math.log10(255) - 48.1308) < 1e-4
    y = x + rng.integers(-9, 10, x.shape)
    mse = sum(float(a - b) ** 2 for a, b in zip(x.reshape(-1), y.reshape(-1))) / x.size
    assert abs(psnr(x, y) - 10 * math.log10(255**2 / mse)) < 1e-10
    with pytest.raises(ValueError):
        psnr(x, x[:-1])


def test_metric_symmetry(rng):
    for shape in ((32, 40), (24, 24, 3)):
        x = rng.integers(0, 256, shape).astype(float)
        y = np.clip(x + rng.normal(0, 12, shape), 0, 255)
        assert abs(psnr(x, y) - psnr(y, x)) < 1e-12
        assert abs(ssim(x, y) - ssim(y, x)) < 1e-12
        for conv in ("rgb", "y", "rgb-mean"):
            assert abs(psnr_convention(x, y, conv) - psnr_convention(y, x, conv)) < 1e-12


# --- PSNR-B --------------------------------------------------------------------


def test_bef_matches_naive(rng):
    for shape in ((16, 16), (24, 40), (33, 19)):
        img = rng.normal(128, 30, shape)
        img[:, 7::8] += 25  # push boundaries up so the factor is positive
        assert abs(blocking_effect_factor(img) - naive_bef(img)) < 1e-9 * max(1.0, naive_bef(img))
    smooth = np.add.outer(np.arange(32.0), np.arange(32.0))
    assert blocking_effect_factor(smooth) == naive_bef(smooth) == 0.0


def test_psnr_b_examples():
    ramp = np.tile(np.linspace(60, 180, 64), (64, 1))
    assert psnr_b(ramp, ramp) == psnr(ramp, ramp) == PSNR_CAP
    stepped = ramp + 6.0 * (np.arange(64) // 8)[None, :]
    assert psnr_b(ramp, stepped) < psnr(ramp, stepped)
    with pytest.raises(ValueError):
        psnr_b(np.zeros((15, 40)), np.zeros((15, 40)))


@pytest.mark.parametrize("name", ["camera", "coins", "moon"])
@pytest.mark.parametrize("q", [10, 40])
def test_psnr_b_at_most_psnr(name, q):
    img = photograph(name)
    out = decode_jpeg_pixels(encode_jpeg(img, q))
    assert psnr_b(img, out) <= psnr(img, out)


def test_psnr_b_colour_uses_luma():
    img = photograph("astronaut_odd")
    out = decode_jpeg_pixels(encode_jpeg(img, 20))
    mse = np.mean((luma(img) - luma(out)) ** 2)
    want = 10 * math.log10(255**2 / (mse + naive_bef(luma(out))))
    assert abs(psnr_b(img, out) - want) < 1e-9


# --- SSIM ----------------------------------------------------------------------


def skimage_ssim(x, y):
    return structural_similarity(
        x, y, gaussian_weights=True, sigma=1.5, use_sample_covariance=False, data_range=255, channel_axis=-1 if x.ndim == 3 else None
    )


@pytest.mark.parametrize("name", ["camera", "coffee_odd", "astronaut_odd"])
def test_ssim_matches_skimage(name):
    img = photograph(name).astype(float)
    out = decode_jpeg_pixels(encode_jpeg(photograph(name), 25)).astype(float)
    assert abs(ssim(img, out) - skimage_ssim(img, out)) < 1e-9


def test_ssim_examples(rng):
    x = rng.integers(0, 256, (40, 40)).astype(float)
    assert ssim(x, x) == 1.0
    assert ssim(x, 255 - x) < -0.9
    with pytest.raises(ValueError):
        ssim(np.zeros((10, 40)), np.zeros((10, 40)))
    rgb = rng.integers(0, 256, (20, 20, 3)).astype(float)
    assert ssim(rgb, rgb) == 1.0
    with pytest.raises(ValueError):
        ssim(rgb, rgb, convention="lab")


def test_all_metrics_conventions():
    img = photograph("coffee_odd")
    out = decode_jpeg_pixels(encode_jpeg(img, 30))
    p, pb, s = all_metrics(img, out)
    assert (p, s) == (psnr(img, out), ssim(img, out))
    py = all_metrics(img, out, "y")
    assert py[0] == psnr(luma(img), luma(out)) and py[2] == ssim(luma(img), luma(out))
    pm = all_metrics(img, out, "rgb-mean")
    assert abs(pm[0] - np.mean([psnr(img[..., c], out[..., c]) for c in range(3)])) < 1e-12


# --- losses --------------------------------------------------------------------


def test_loss_weight_defaults():
    w = LossWeights()
    assert (w.lam, w.gamma, w.nu) == (0.05, 5e-3, 1e-2)
    with pytest.raises(ValueError):
        LossWeights(gamma=-1)


def test_differentiable_ssim_matches_metric():
    img = photograph("camera")[:64, :80].astype(float)
    out = decode_jpeg_pixels(encode_jpeg(photograph("camera")[:64, :80], 20)).astype(float)
    t = ssim_tensor(Tensor(img[None, None] / 255), Tensor(out[None, None] / 255)).item()
    assert abs(t - ssim(img, out)) < 1e-12


def test_l_jpeg_examples(rng):
    x = Tensor(rng.random((2, 1, 16, 16)))
    assert l_jpeg(x, x, 0.05).item() == -0.05
    y = Tensor(rng.random((2, 1, 16, 16)))
    assert l_jpeg(x, y, 0.0).item() == mean_l1(x, y).item()
    assert abs(mean_l1(x, y).item() - np.abs(x.data - y.data).mean()) < 1e-15
    with pytest.raises(ValueError):
        l_jpeg(x, Tensor(rng.random((2, 1, 16, 15))))
    with pytest.raises(ValueError):
        ssim_tensor(Tensor(rng.random((1, 1, 8, 8))), Tensor(rng.random((1, 1, 8, 8))))


def test_l_jpeg_gradient(rng):
    x, y = rng.random((2, 1, 1, 16, 16))
    assert check(lambda t: l_jpeg(t["x"], t["y"], 0.05), {"x": x, "y": y}) < 1e-3


def test_texture_loss(rng):
    x = Tensor(rng.random((1, 1, 16, 16)))
    y = Tensor(rng.random((1, 1, 16, 16)))
    assert texture_loss(x, y, identity_extractor()).item() == mean_l1(x, y).item()
    f = random_conv_extractor(seed=3)
    assert texture_loss(x, x, f).item() == 0.0
    assert f(x).shape == (1, 8, 8, 8)
    assert np.array_equal(f(x).data, random_conv_extractor(seed=3)(x).data)
    err = check(lambda t: texture_loss(t["x"], t["y"], f), {"x": x.data, "y": y.data})
    assert err < 1e-3


def test_ragan_examples(rng):
    s = rng.normal(size=8)
    assert abs(ragan_generator_loss(Tensor(s * 0 + 0.7), Tensor(s * 0 + 0.7)).item() - 2 * LOG2) < 1e-15
    assert abs(2 * LOG2 - 1.3863) < 1e-4
    far = ragan_generator_loss(Tensor(np.zeros(4)), Tensor(np.full(4, 20.0))).item()
    assert 0 < far < 1e-8
    assert abs(far - 2 * math.log1p(math.exp(-20))) < 1e-20
    huge = ragan_generator_loss(Tensor(np.zeros(4)), Tensor(np.full(4, -800.0))).item()
    assert math.isfinite(huge) and abs(huge - 1600) < 1e-9
    with pytest.raises(ValueError):
        ragan_generator_loss(Tensor(np.zeros(0)), Tensor(np.zeros(3)))


def test_ragan_swap_symmetry(rng):
    r, f = rng.normal(size=6), rng.normal(size=9)
    a = ragan_generator_loss(Tensor(r), Tensor(f)).item()
    b = ragan_generator_loss(Tensor(-f), Tensor(-r)).item()
    assert abs(a - b) < 1e-12
    assert abs(a - ragan_generator_loss(Tensor(f), Tensor(r)).item()) > 1e-6


def test_ragan_gradient(rng):
    r, f = rng.normal(size=6), rng.normal(size=9)
    assert check(lambda t: ragan_generator_loss(t["r"], t["f"]), {"r": r, "f": f}) < 1e-3


def test_gan_total_examples(rng):
    x = Tensor(rng.random((1, 1, 16, 16)))
    y = Tensor(rng.random((1, 1, 16, 16)))
    dr, df = Tensor(rng.normal(size=4)), Tensor(rng.normal(size=4))
    f = random_conv_extractor()
    zero = LossWeights(gamma=0.0, nu=0.0)
    assert gan_total_loss(x, y, dr, df, f, zero).item() == texture_loss(x, y, f).item()
    eq = Tensor(np.zeros(4))
    w = LossWeights()
    assert abs(gan_total_loss(x, x, eq, eq, identity_extractor(), w).item() - 2 * w.gamma * LOG2) < 1e-15
    parts = texture_loss(x, y, f).item() + 5e-3 * ragan_generator_loss(dr, df).item() + 1e-2 * mean_l1(x, y).item()
    assert abs(gan_total_loss(x, y, dr, df, f).item() - parts) < 1e-14
    err = check(
        lambda t: gan_total_loss(t["x"], t["y"], t["r"], t["f"], f),
        {"x": x.data, "y": y.data, "r": dr.data, "f": df.data},
    )
    assert err < 1e-3
