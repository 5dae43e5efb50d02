"""Filter-manifold convolutions and residual-in-residual dense blocks."""

from __future__ import annotations

import numpy as np

from ..nn import ops
from ..nn.module import Conv2d, Module, PReLU, parameter
from ..nn.tensor import Tensor


def rearrange(x: Tensor) -> Tensor:
    """(N, 1, H, W) coefficients -> (N, 64, H/8, W/8), channel i*8+j."""
    n, c, h, w = x.shape
    if c != 1 or h % 8 or w % 8:
        raise ValueError(f"expected (N, 1, 8k, 8m) coefficients, got {x.shape}")
    y = ops.reshape(x, (n, h // 8, 8, w // 8, 8))
    y = ops.transpose(y, (0, 2, 4, 1, 3))
    return ops.reshape(y, (n, 64, h // 8, w // 8))


def unrearrange(x: Tensor) -> Tensor:
    n, c, hb, wb = x.shape
    if c != 64:
        raise ValueError(f"expected 64 frequency channels, got {x.shape}")
    y = ops.reshape(x, (n, 8, 8, hb, wb))
    y = ops.transpose(y, (0, 3, 1, 4, 2))
    return ops.reshape(y, (n, 1, hb * 8, wb * 8))


class CFM(Module):
    """8x8 stride-8 convolution whose kernel is generated from the quant table.

    The generator is three 3x3 convolutions over the 8x8 normalized table;
    its c_out*c_in output channels are reshaped into the kernel.
    """

    def __init__(
        self,
        rng: np.random.Generator,
        c_in: int,
        c_out: int,
        transposed: bool = False,
        hidden: tuple[int, int] = (16, 32),
        zero_init: bool = False,
    ):
        h1, h2 = hidden
        self.c_in = c_in
        self.c_out = c_out
        self.transposed = transposed
        self.gen = [
            Conv2d(rng, 1, h1, 3, padding=1),
            PReLU(h1),
            Conv2d(rng, h1, h2, 3, padding=1),
            PReLU(h2),
            Conv2d(rng, h2, c_in * c_out, 3, padding=1, zero_init=zero_init),
        ]
        self.bias = parameter(np.zeros(c_out))
        self.spec = ops.ConvSpec(c_in, c_out, 8, 8, stride=8, transposed=transposed)

    def kernel(self, qnorm) -> Tensor:
        q = np.asarray(qnorm, dtype=self.bias.dtype)
        if q.shape != (8, 8):
            raise ValueError(f"qnorm must be 8x8, got {q.shape}")
        h = Tensor(q.reshape(1, 1, 8, 8))
        for layer in self.gen:
            h = layer(h)
        k = ops.reshape(h, (self.c_out, self.c_in, 8, 8))
        if self.transposed:
            k = ops.transpose(k, (1, 0, 2, 3))
        return k

    def __call__(self, x: Tensor, qnorm) -> Tensor:
        """``qnorm`` is one 8x8 table or one per batch item (N, 8, 8)."""
        q = np.asarray(qnorm)
        if q.ndim == 2:
            return ops.conv2d(x, self.kernel(q), self.bias, self.spec)
        if q.shape[0] != x.shape[0]:
            raise ValueError(f"{q.shape[0]} tables for a batch of {x.shape[0]}")
        if all(np.array_equal(q[0], qi) for qi in q[1:]):
            return ops.conv2d(x, self.kernel(q[0]), self.bias, self.spec)
        outs = []
        for i in range(x.shape[0]):
            outs.append(ops.conv2d(ops.take(x, i), self.kernel(q[i]), self.bias, self.spec))
        return ops.concat(outs, axis=0)


class RDB(Module):
    """Dense block of five 3x3 convolutions with a scaled residual."""

    def __init__(self, rng, channels: int, growth: int, groups: int = 1, beta: float = 0.2):
        self.groups = groups
        self.beta = beta
        self.convs = [Conv2d(rng, channels + i * growth, growth, 3, padding=1, groups=groups) for i in range(4)]
        self.acts = [PReLU(growth) for _ in range(4)]
        self.conv5 = Conv2d(rng, channels + 4 * growth, channels, 3, padding=1, groups=groups, zero_init=True)

    def __call__(self, x: Tensor) -> Tensor:
        feats = [x]
        for conv, act in zip(self.convs, self.acts):
            inp = feats[0] if len(feats) == 1 else ops.concat(feats, axis=1, groups=self.groups)
            feats.append(act(conv(inp)))
        out = self.conv5(ops.concat(feats, axis=1, groups=self.groups))
        return x + out * self.beta


class RRDB(Module):
    """Three dense blocks (15 convolutions) wrapped in another scaled residual."""

    def __init__(self, rng, channels: int, growth: int, groups: int = 1, beta: float = 0.2):
        if channels % groups or growth % groups:
            raise ValueError(f"channels {channels} / growth {growth} not divisible by groups {groups}")
        self.beta = beta
        self.blocks = [RDB(rng, channels, growth, groups, beta) for _ in range(3)]

    def __call__(self, x: Tensor) -> Tensor:
        h = x
        for b in self.blocks:
            h = b(h)
        return x + h * self.beta

    def conv_count(self) -> int:
        return sum(len(b.convs) + 1 for b in self.blocks)
