"""Y-channel and colour restoration networks over DCT coefficients.

All networks consume normalized coefficient planes shaped (N, 1, H, W) and
return same-grid residuals or restorations in normalized units.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from ..nn import ops
from ..nn.module import Conv2d, Module, PReLU
from ..nn.tensor import Tensor
from .layers import CFM, RRDB, rearrange, unrearrange


@dataclass(frozen=True)
class NetworkConfig:
    width: int = 256
    growth: int = 32
    freq_width: int = 256
    freq_growth: int = 64
    fusion_width: int = 32
    cfm_hidden: tuple[int, int] = (16, 32)

    def __post_init__(self):
        for key in ("width", "growth", "freq_width", "freq_growth", "fusion_width"):
            if getattr(self, key) <= 0:
                raise ValueError(f"{key} must be positive")
        if self.freq_width % 64 or self.freq_growth % 64:
            raise ValueError(f"frequency widths must be multiples of 64, got {self.freq_width}/{self.freq_growth}")
        object.__setattr__(self, "cfm_hidden", tuple(int(v) for v in self.cfm_hidden))

    @classmethod
    def toy(cls) -> NetworkConfig:
        return cls(width=16, growth=8, freq_width=64, freq_growth=64, fusion_width=32)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["cfm_hidden"] = list(self.cfm_hidden)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> NetworkConfig:
        return cls(**{**d, "cfm_hidden": tuple(d.get("cfm_hidden", (16, 32)))})


def _check_grid(x: Tensor):
    if x.ndim != 4 or x.shape[1] != 1 or x.shape[2] % 8 or x.shape[3] % 8:
        raise ValueError(f"expected (N, 1, H, W) with H, W multiples of 8, got {x.shape}")


class BlockNet(Module):
    def __init__(self, rng, cfg: NetworkConfig, zero_tail: bool = False):
        self.encoder = CFM(rng, 1, cfg.width, hidden=cfg.cfm_hidden)
        self.rrdb = RRDB(rng, cfg.width, cfg.growth)
        self.decoder = CFM(rng, cfg.width, 1, transposed=True, hidden=cfg.cfm_hidden, zero_init=zero_tail)

    def __call__(self, x: Tensor, qnorm) -> Tensor:
        _check_grid(x)
        return self.decoder(self.rrdb(self.encoder(x, qnorm)), qnorm)


class FrequencyNet(Module):
    def __init__(self, rng, cfg: NetworkConfig):
        if cfg.freq_width % 64:
            raise ValueError(f"frequency width {cfg.freq_width} not divisible by 64")
        self.conv_in = Conv2d(rng, 64, cfg.freq_width, 3, padding=1)
        self.rrdb = RRDB(rng, cfg.freq_width, cfg.freq_growth, groups=64)
        self.conv_out = Conv2d(rng, cfg.freq_width, 64, 3, padding=1)

    def __call__(self, x: Tensor) -> Tensor:
        _check_grid(x)
        return unrearrange(self.conv_out(self.rrdb(self.conv_in(rearrange(x)))))


class Fusion(Module):
    def __init__(self, rng, cfg: NetworkConfig, zero_tail: bool = True):
        f = cfg.fusion_width
        self.conv1 = Conv2d(rng, 3, f, 3, padding=1)
        self.act1 = PReLU(f)
        self.conv2 = Conv2d(rng, f, f, 3, padding=1)
        self.act2 = PReLU(f)
        self.conv3 = Conv2d(rng, f, 1, 3, padding=1, zero_init=zero_tail)

    def __call__(self, r1: Tensor, r2: Tensor, r3: Tensor) -> Tensor:
        if not r1.shape == r2.shape == r3.shape:
            raise ValueError(f"fusion inputs differ in shape: {r1.shape}, {r2.shape}, {r3.shape}")
        h = ops.concat([r1, r2, r3], axis=1)
        return self.conv3(self.act2(self.conv2(self.act1(self.conv1(h)))))


class ColorNet(Module):
    """Chroma residual at luma resolution, guided by the restored Y plane."""

    def __init__(self, rng, cfg: NetworkConfig, zero_tail: bool = True):
        w = cfg.width
        self.chroma_cfm = CFM(rng, 1, w, hidden=cfg.cfm_hidden)
        self.chroma_rrdb = RRDB(rng, w, cfg.growth)
        self.upsample = Conv2d(rng, w, w, 4, stride=2, padding=1, transposed=True)
        self.luma_cfm = CFM(rng, 1, w, hidden=cfg.cfm_hidden)
        self.joint_rrdb = RRDB(rng, 2 * w, cfg.growth)
        self.decoder = CFM(rng, 2 * w, 1, transposed=True, hidden=cfg.cfm_hidden, zero_init=zero_tail)

    def __call__(self, c: Tensor, y: Tensor, q_chroma, q_luma) -> Tensor:
        _check_grid(c)
        _check_grid(y)
        if y.shape[2] != 2 * c.shape[2] or y.shape[3] != 2 * c.shape[3] or y.shape[0] != c.shape[0]:
            raise ValueError(f"luma grid {y.shape} must be twice the chroma grid {c.shape}")
        h = self.upsample(self.chroma_rrdb(self.chroma_cfm(c, q_chroma)))
        g = self.luma_cfm(y, q_luma)
        h = self.joint_rrdb(ops.concat([h, g], axis=1))
        return self.decoder(h, q_chroma)


class QGACNet(Module):
    """Every trainable part; attribute names are the checkpoint name prefixes."""

    def __init__(self, cfg: NetworkConfig | None = None, seed: int = 0, zero_tails: bool = True):
        cfg = cfg or NetworkConfig()
        rng = np.random.Generator(np.random.PCG64(seed))
        self.config = cfg
        self.blocknet_pre = BlockNet(rng, cfg)
        self.frequencynet = FrequencyNet(rng, cfg)
        self.blocknet_post = BlockNet(rng, cfg)
        self.fusion = Fusion(rng, cfg, zero_tail=zero_tails)
        self.color_net = ColorNet(rng, cfg, zero_tail=zero_tails)

    def y_residual(self, x: Tensor, qnorm) -> Tensor:
        r1 = self.blocknet_pre(x, qnorm)
        r2 = self.frequencynet(r1)
        r3 = self.blocknet_post(r2, qnorm)
        return self.fusion(r1, r2, r3)

    def y_forward(self, x: Tensor, qnorm) -> Tensor:
        return x + self.y_residual(x, qnorm)

    def y_parameters(self) -> dict[str, Tensor]:
        return {n: p for n, p in self.named_parameters() if not n.startswith("color_net.")}

    def color_parameters(self) -> dict[str, Tensor]:
        return {n: p for n, p in self.named_parameters() if n.startswith("color_net.")}
