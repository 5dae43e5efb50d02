"""Differentiable operators.

Each op computes its value with numpy and registers a closure mapping the
output gradient to one gradient per input (``None`` when not needed).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .tensor import Tensor, as_tensor, make


def _unbroadcast(g: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    if g.shape == shape:
        return g
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for i, n in enumerate(shape):
        if n == 1 and g.shape[i] != 1:
            g = g.sum(axis=i, keepdims=True)
    return g


def _pair(a, b):
    a = as_tensor(a)
    b = as_tensor(b)
    if a.dtype != b.dtype and not a.requires_grad and a.data.ndim == 0:
        a = Tensor(a.data.astype(b.dtype))
    elif a.dtype != b.dtype and not b.requires_grad and b.data.ndim == 0:
        b = Tensor(b.data.astype(a.dtype))
    return a, b


def add(a, b) -> Tensor:
    a, b = _pair(a, b)
    return make(a.data + b.data, (a, b), lambda g: (_unbroadcast(g, a.shape), _unbroadcast(g, b.shape)))


def sub(a, b) -> Tensor:
    a, b = _pair(a, b)
    return make(a.data - b.data, (a, b), lambda g: (_unbroadcast(g, a.shape), _unbroadcast(-g, b.shape)))


def mul(a, b) -> Tensor:
    a, b = _pair(a, b)

    def back(g):
        ga = _unbroadcast(g * b.data, a.shape) if a.requires_grad else None
        gb = _unbroadcast(g * a.data, b.shape) if b.requires_grad else None
        return ga, gb

    return make(a.data * b.data, (a, b), back)


def div(a, b) -> Tensor:
    a, b = _pair(a, b)
    out = a.data / b.data

    def back(g):
        ga = _unbroadcast(g / b.data, a.shape) if a.requires_grad else None
        gb = _unbroadcast(-g * out / b.data, b.shape) if b.requires_grad else None
        return ga, gb

    return make(out, (a, b), back)


def square(x: Tensor) -> Tensor:
    return make(x.data * x.data, (x,), lambda g: (2.0 * g * x.data,))


def abs(x: Tensor) -> Tensor:  # noqa: A001 - mirrors numpy naming
    return make(np.abs(x.data), (x,), lambda g: (g * np.sign(x.data),))


def sum(x: Tensor, axis=None, keepdims: bool = False) -> Tensor:  # noqa: A001
    out = x.data.sum(axis=axis, keepdims=keepdims)

    def back(g):
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g, x.shape).copy(),)

    return make(np.asarray(out), (x,), back)


def mean(x: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    count = x.data.size if axis is None else int(np.prod([x.shape[a] for a in np.atleast_1d(axis)]))
    return div(sum(x, axis, keepdims), float(count))


def reshape(x: Tensor, shape) -> Tensor:
    return make(x.data.reshape(shape), (x,), lambda g: (g.reshape(x.shape),))


def transpose(x: Tensor, axes) -> Tensor:
    axes = tuple(axes)
    inverse = tuple(np.argsort(axes))
    return make(x.data.transpose(axes), (x,), lambda g: (g.transpose(inverse),))


def concat(tensors, axis: int = 1, groups: int = 1) -> Tensor:
    """Join along ``axis``. With ``groups > 1`` channels are joined group by
    group, so group k of the result holds group k of every input."""
    tensors = [as_tensor(t) for t in tensors]
    if groups == 1:
        sizes = [t.shape[axis] for t in tensors]
        ref = tensors[0].shape
        for t in tensors[1:]:
            other = [n for i, n in enumerate(t.shape) if i != axis % t.ndim]
            if other != [n for i, n in enumerate(ref) if i != axis % t.ndim]:
                raise ValueError(f"concat shape mismatch: {ref} vs {t.shape} on axis {axis}")
        out = np.concatenate([t.data for t in tensors], axis=axis)
        cuts = np.cumsum(sizes)[:-1]

        def back(g):
            return tuple(np.split(g, cuts, axis=axis))

        return make(out, tuple(tensors), back)
    if axis != 1:
        raise ValueError("grouped concat is defined on the channel axis only")
    parts = []
    per = []
    for t in tensors:
        n, c, h, w = t.shape
        if c % groups:
            raise ValueError(f"channels {c} not divisible by groups {groups}")
        per.append(c // groups)
        parts.append(t.data.reshape(n, groups, c // groups, h, w))
    out = np.concatenate(parts, axis=2)
    n, _, _, h, w = out.shape
    cuts = np.cumsum(per)[:-1]

    def back_grouped(g):
        g = g.reshape(n, groups, -1, h, w)
        return tuple(p.reshape(n, -1, h, w) for p in np.split(g, cuts, axis=2))

    return make(out.reshape(n, -1, h, w), tuple(tensors), back_grouped)


def concat_channels(a, b) -> Tensor:
    """Channels of ``a`` followed by channels of ``b``."""
    return concat([a, b], axis=1)


def take(x: Tensor, i: int) -> Tensor:
    """Batch item ``i`` keeping a leading axis of 1."""

    def back(g):
        full = np.zeros_like(x.data)
        full[i] = g[0]
        return (full,)

    return make(x.data[i : i + 1].copy(), (x,), back)


def prelu(x: Tensor, slopes: Tensor) -> Tensor:
    """Per-channel leaky rectifier with learned negative slopes (axis 1)."""
    if slopes.data.ndim != 1 or slopes.shape[0] != x.shape[1]:
        raise ValueError(f"prelu needs {x.shape[1]} slopes, got shape {slopes.shape}")
    a = slopes.data.reshape(1, -1, *([1] * (x.ndim - 2)))
    pos = x.data > 0
    out = np.where(pos, x.data, a * x.data)

    def back(g):
        gx = np.where(pos, g, a * g) if x.requires_grad else None
        ga = None
        if slopes.requires_grad:
            axes = tuple(i for i in range(x.ndim) if i != 1)
            ga = np.where(pos, 0.0, g * x.data).sum(axis=axes)
        return gx, ga

    return make(out, (x, slopes), back)


def log_sigmoid(x: Tensor) -> Tensor:
    """log(1 / (1 + exp(-x))) without overflow."""
    d = x.data
    out = np.minimum(d, 0.0) - np.log1p(np.exp(-np.abs(d)))
    # derivative is sigmoid(-x)
    sig_neg = np.exp(np.minimum(-d, 0.0)) / (1.0 + np.exp(-np.abs(d)))
    return make(out, (x,), lambda g: (g * sig_neg,))


def block_transform(x: Tensor, m: np.ndarray) -> Tensor:
    """Apply ``m @ B @ m.T`` to every 8x8 block of the last two axes."""
    k = m.shape[0]
    shape = x.shape
    h, w = shape[-2:]
    if h % k or w % k:
        raise ValueError(f"dims {shape} not multiples of {k}")
    m = m.astype(x.dtype)

    def apply(arr, mat):
        b = arr.reshape(*shape[:-2], h // k, k, w // k, k)
        out = np.einsum("ux,...rxcy,vy->...rucv", mat, b, mat, optimize=True)
        return out.reshape(shape)

    return make(apply(x.data, m), (x,), lambda g: (apply(g, m.T),))


# --------------------------------------------------------------------------
# convolution


@dataclass(frozen=True)
class ConvSpec:
    in_channels: int
    out_channels: int
    kernel_h: int
    kernel_w: int
    stride: int = 1
    padding: int = 0
    groups: int = 1
    transposed: bool = False

    def __post_init__(self):
        if self.in_channels % self.groups or self.out_channels % self.groups:
            raise ValueError(
                f"channels {self.in_channels}->{self.out_channels} not divisible by groups {self.groups}"
            )
        if self.stride < 1:
            raise ValueError(f"stride must be >= 1, got {self.stride}")
        if self.padding < 0:
            raise ValueError(f"padding must be >= 0, got {self.padding}")

    @property
    def weight_shape(self) -> tuple[int, int, int, int]:
        if self.transposed:
            return (self.in_channels, self.out_channels // self.groups, self.kernel_h, self.kernel_w)
        return (self.out_channels, self.in_channels // self.groups, self.kernel_h, self.kernel_w)

    def output_hw(self, h: int, w: int) -> tuple[int, int]:
        s, p = self.stride, self.padding
        if self.transposed:
            return (h - 1) * s - 2 * p + self.kernel_h, (w - 1) * s - 2 * p + self.kernel_w
        return (h + 2 * p - self.kernel_h) // s + 1, (w + 2 * p - self.kernel_w) // s + 1


def _im2col(xp: np.ndarray, groups: int, kh: int, kw: int, s: int, ho: int, wo: int) -> np.ndarray:
    """(N, C, Hp, Wp) -> (groups, N*ho*wo, C/groups*kh*kw)."""
    n, c = xp.shape[:2]
    win = np.lib.stride_tricks.sliding_window_view(xp, (kh, kw), axis=(2, 3))
    win = win[:, :, : (ho - 1) * s + 1 : s, : (wo - 1) * s + 1 : s]
    # win: (N, C, ho, wo, kh, kw)
    win = win.reshape(n, groups, c // groups, ho, wo, kh, kw)
    return win.transpose(1, 0, 3, 4, 2, 5, 6).reshape(groups, n * ho * wo, -1)


def _col2im(cols: np.ndarray, n: int, c: int, hp: int, wp: int, kh: int, kw: int, s: int, ho: int, wo: int):
    """Scatter-add inverse of :func:`_im2col`."""
    groups = cols.shape[0]
    cols = cols.reshape(groups, n, ho, wo, c // groups, kh, kw).transpose(1, 0, 4, 5, 6, 2, 3)
    cols = cols.reshape(n, c, kh, kw, ho, wo)
    out = np.zeros((n, c, hp, wp), dtype=cols.dtype)
    for i in range(kh):
        for j in range(kw):
            out[:, :, i : i + (ho - 1) * s + 1 : s, j : j + (wo - 1) * s + 1 : s] += cols[:, :, i, j]
    return out


def _check_conv(x: Tensor, weight: Tensor, bias: Tensor | None, spec: ConvSpec):
    if x.ndim != 4:
        raise ValueError(f"conv input must be NCHW, got shape {x.shape}")
    if x.shape[1] != spec.in_channels:
        raise ValueError(f"conv expects {spec.in_channels} input channels, got {x.shape[1]} (input {x.shape})")
    if weight.shape != spec.weight_shape:
        raise ValueError(f"conv weight shape {weight.shape} does not match {spec.weight_shape}")
    if bias is not None and bias.shape != (spec.out_channels,):
        raise ValueError(f"conv bias shape {bias.shape} does not match ({spec.out_channels},)")


def _pad(x: np.ndarray, p: int) -> np.ndarray:
    if p == 0:
        return x
    return np.pad(x, ((0, 0), (0, 0), (p, p), (p, p)))


def conv2d(x: Tensor, weight: Tensor, bias: Tensor | None, spec: ConvSpec) -> Tensor:
    """Cross-correlation; group g uses input channels [g*Cin/G, (g+1)*Cin/G)."""
    if spec.transposed:
        return conv_transpose2d(x, weight, bias, spec)
    _check_conv(x, weight, bias, spec)
    n, c, h, w = x.shape
    g_, kh, kw, s, p = spec.groups, spec.kernel_h, spec.kernel_w, spec.stride, spec.padding
    ho, wo = spec.output_hw(h, w)
    if ho < 1 or wo < 1:
        raise ValueError(f"conv output would be empty for input {x.shape} and kernel {kh}x{kw}")
    o = spec.out_channels
    xp = _pad(x.data, p)
    cols = _im2col(xp, g_, kh, kw, s, ho, wo)
    wmat = weight.data.reshape(g_, o // g_, -1).transpose(0, 2, 1)
    out = np.matmul(cols, wmat)  # (G, N*ho*wo, O/G)
    out = out.reshape(g_, n, ho, wo, o // g_).transpose(1, 0, 4, 2, 3).reshape(n, o, ho, wo)
    if bias is not None:
        out = out + bias.data.reshape(1, -1, 1, 1)

    def back(gout):
        gm = gout.reshape(n, g_, o // g_, ho, wo).transpose(1, 0, 3, 4, 2).reshape(g_, n * ho * wo, o // g_)
        gx = gw = gb = None
        if x.requires_grad:
            gcols = np.matmul(gm, wmat.transpose(0, 2, 1))
            gxp = _col2im(gcols, n, c, h + 2 * p, w + 2 * p, kh, kw, s, ho, wo)
            gx = gxp[:, :, p : p + h, p : p + w] if p else gxp
        if weight.requires_grad:
            gw = np.matmul(cols.transpose(0, 2, 1), gm).transpose(0, 2, 1).reshape(weight.shape)
        if bias is not None and bias.requires_grad:
            gb = gout.sum(axis=(0, 2, 3))
        return gx, gw, gb

    parents = (x, weight) if bias is None else (x, weight, bias)
    return make(out, parents, back)


def conv_transpose2d(x: Tensor, weight: Tensor, bias: Tensor | None, spec: ConvSpec) -> Tensor:
    """Adjoint of :func:`conv2d`; weight is (Cin, Cout/G, kh, kw)."""
    if not spec.transposed:
        raise ValueError("conv_transpose2d needs a spec with transposed=True")
    _check_conv(x, weight, bias, spec)
    n, c, h, w = x.shape
    g_, kh, kw, s, p = spec.groups, spec.kernel_h, spec.kernel_w, spec.stride, spec.padding
    o = spec.out_channels
    ho, wo = spec.output_hw(h, w)
    if ho < 1 or wo < 1:
        raise ValueError(f"transposed conv output would be empty for input {x.shape}")
    hf, wf = (h - 1) * s + kh, (w - 1) * s + kw
    xm = x.data.reshape(n, g_, c // g_, h, w).transpose(1, 0, 3, 4, 2).reshape(g_, n * h * w, c // g_)
    wmat = weight.data.reshape(g_, c // g_, -1)  # (G, Cin/G, Cout/G*kh*kw)
    cols = np.matmul(xm, wmat)
    full = _col2im(cols, n, o, hf, wf, kh, kw, s, h, w)
    out = full[:, :, p : p + ho, p : p + wo]
    if bias is not None:
        out = out + bias.data.reshape(1, -1, 1, 1)
    else:
        out = out.copy()

    def back(gout):
        gfull = np.zeros((n, o, hf, wf), dtype=gout.dtype)
        gfull[:, :, p : p + ho, p : p + wo] = gout
        gcols = _im2col(gfull, g_, kh, kw, s, h, w)  # (G, N*h*w, Cout/G*kh*kw)
        gx = gw = gb = None
        if x.requires_grad:
            gm = np.matmul(gcols, wmat.transpose(0, 2, 1))
            gx = gm.reshape(g_, n, h, w, c // g_).transpose(1, 0, 4, 2, 3).reshape(x.shape)
        if weight.requires_grad:
            gw = np.matmul(xm.transpose(0, 2, 1), gcols).reshape(weight.shape)
        if bias is not None and bias.requires_grad:
            gb = gout.sum(axis=(0, 2, 3))
        return gx, gw, gb

    parents = (x, weight) if bias is None else (x, weight, bias)
    return make(out, parents, back)
