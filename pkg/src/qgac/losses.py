"""Differentiable training objectives built on the tensor engine."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .metrics import _gaussian_window
from .nn import ops
from .nn.module import kaiming
from .nn.tensor import Tensor, as_tensor


@dataclass(frozen=True)
class LossWeights:
    lam: float = 0.05  # SSIM weight in the regression loss
    gamma: float = 5e-3  # adversarial weight
    nu: float = 1e-2  # L1 weight in the GAN loss

    def __post_init__(self):
        if min(self.lam, self.gamma, self.nu) < 0:
            raise ValueError("loss weights must be non-negative")


@dataclass(frozen=True)
class FeatureExtractor:
    fn: Callable[[Tensor], Tensor]
    name: str

    def __call__(self, x: Tensor) -> Tensor:
        return self.fn(x)


def _same_shape(x: Tensor, y: Tensor):
    if x.shape != y.shape:
        raise ValueError(f"shape mismatch: {x.shape} vs {y.shape}")


def mean_l1(x, y) -> Tensor:
    x, y = as_tensor(x), as_tensor(y)
    _same_shape(x, y)
    return ops.mean(ops.abs(x - y))


def _blur(x: Tensor, window: np.ndarray) -> Tensor:
    n, c, h, w = x.shape
    k = np.outer(window, window).astype(x.dtype)
    weight = Tensor(np.broadcast_to(k, (c, 1, *k.shape)).copy())
    spec = ops.ConvSpec(c, c, k.shape[0], k.shape[1], groups=c)
    return ops.conv2d(x, weight, None, spec)


def ssim_tensor(x, y, data_range: float = 1.0) -> Tensor:
    """Mean local SSIM of NCHW tensors with the metric's Gaussian windows."""
    x, y = as_tensor(x), as_tensor(y)
    _same_shape(x, y)
    if x.ndim != 4 or min(x.shape[2:]) < 11:
        raise ValueError(f"SSIM needs NCHW input at least 11x11, got {x.shape}")
    g = _gaussian_window()
    c1 = (0.01 * data_range) ** 2
    c2 = (0.03 * data_range) ** 2
    mx = _blur(x, g)
    my = _blur(y, g)
    sxx = _blur(x * x, g) - mx * mx
    syy = _blur(y * y, g) - my * my
    sxy = _blur(x * y, g) - mx * my
    num = (2.0 * mx * my + c1) * (2.0 * sxy + c2)
    den = (mx * mx + my * my + c1) * (sxx + syy + c2)
    return ops.mean(num / den)


def l_jpeg(x, y, lam: float = 0.05, data_range: float = 1.0) -> Tensor:
    """Mean absolute error minus ``lam`` times SSIM."""
    x, y = as_tensor(x), as_tensor(y)
    l1 = mean_l1(x, y)
    if lam == 0:
        return l1
    return l1 - lam * ssim_tensor(x, y, data_range)


def texture_loss(x, y, extractor: FeatureExtractor) -> Tensor:
    fx = extractor(as_tensor(x))
    fy = extractor(as_tensor(y))
    if fx.shape != fy.shape:
        raise ValueError(f"extractor {extractor.name} gave shapes {fx.shape} and {fy.shape}")
    return mean_l1(fy, fx)


def ragan_generator_loss(d_real, d_fake) -> Tensor:
    """Relativistic average generator objective from critic scores."""
    d_real, d_fake = as_tensor(d_real), as_tensor(d_fake)
    if d_real.data.size == 0 or d_fake.data.size == 0:
        raise ValueError("critic score batches must be non-empty")
    real_rel = d_real - ops.mean(d_fake)
    fake_rel = d_fake - ops.mean(d_real)
    # log(1 - sigmoid(t)) = log_sigmoid(-t)
    return -(ops.mean(ops.log_sigmoid(fake_rel)) + ops.mean(ops.log_sigmoid(-real_rel)))


def gan_total_loss(x, y, d_real, d_fake, extractor: FeatureExtractor, weights: LossWeights = LossWeights()) -> Tensor:
    return (
        texture_loss(x, y, extractor)
        + weights.gamma * ragan_generator_loss(d_real, d_fake)
        + weights.nu * mean_l1(x, y)
    )


def identity_extractor() -> FeatureExtractor:
    return FeatureExtractor(lambda t: t, "identity")


def random_conv_extractor(in_channels: int = 1, channels: int = 8, seed: int = 0) -> FeatureExtractor:
    """Two fixed random 3x3 conv layers with a PReLU between them."""
    rng = np.random.Generator(np.random.PCG64(seed))
    w1 = Tensor(kaiming(rng, (channels, in_channels, 3, 3), in_channels * 9))
    w2 = Tensor(kaiming(rng, (channels, channels, 3, 3), channels * 9))
    slopes = Tensor(np.full(channels, 0.25))
    s1 = ops.ConvSpec(in_channels, channels, 3, 3, padding=1)
    s2 = ops.ConvSpec(channels, channels, 3, 3, stride=2, padding=1)

    def fn(t: Tensor) -> Tensor:
        dt = t.dtype
        h = ops.prelu(ops.conv2d(t, Tensor(w1.data.astype(dt)), None, s1), Tensor(slopes.data.astype(dt)))
        return ops.conv2d(h, Tensor(w2.data.astype(dt)), None, s2)

    return FeatureExtractor(fn, f"random-conv-{channels}-seed{seed}")
