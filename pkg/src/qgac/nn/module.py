"""Parameter containers, layers and weight initialization."""

from __future__ import annotations

import numpy as np

from . import ops
from .tensor import Tensor


class Module:
    """Base for anything owning parameters.

    Parameters are Tensor attributes with ``requires_grad``; child modules are
    Module attributes or lists of Modules. Names follow attribute paths.
    """

    def named_parameters(self, prefix: str = "") -> list[tuple[str, Tensor]]:
        out = []
        for key, val in vars(self).items():
            name = f"{prefix}{key}"
            if isinstance(val, Tensor) and val.requires_grad:
                out.append((name, val))
            elif isinstance(val, Module):
                out.extend(val.named_parameters(name + "."))
            elif isinstance(val, (list, tuple)):
                for i, item in enumerate(val):
                    if isinstance(item, Module):
                        out.extend(item.named_parameters(f"{name}.{i}."))
        return out

    def parameters(self) -> list[Tensor]:
        return [p for _, p in self.named_parameters()]

    def zero_grad(self):
        for p in self.parameters():
            p.grad = None

    def state_dict(self) -> dict[str, np.ndarray]:
        return {name: p.data.copy() for name, p in self.named_parameters()}

    def load_state_dict(self, state: dict[str, np.ndarray]):
        params = dict(self.named_parameters())
        missing = sorted(set(params) - set(state))
        extra = sorted(set(state) - set(params))
        if missing or extra:
            raise KeyError(f"state mismatch: missing {missing[:5]}, unexpected {extra[:5]}")
        for name, p in params.items():
            arr = np.asarray(state[name])
            if arr.shape != p.shape:
                raise ValueError(f"{name}: shape {arr.shape} does not match {p.shape}")
            p.data = arr.astype(p.dtype, copy=True)

    def astype(self, dtype) -> Module:
        for _, p in self.named_parameters():
            p.data = p.data.astype(dtype)
        return self


def parameter(data: np.ndarray, dtype=np.float64) -> Tensor:
    return Tensor(np.asarray(data, dtype=dtype), requires_grad=True)


def kaiming(rng: np.random.Generator, shape, fan_in: int, slope: float = 0.25) -> np.ndarray:
    """Normal init with std sqrt(2 / ((1 + slope^2) fan_in))."""
    std = np.sqrt(2.0 / ((1.0 + slope * slope) * fan_in))
    return rng.normal(0.0, std, size=shape)


class Conv2d(Module):
    def __init__(
        self,
        rng: np.random.Generator,
        in_ch: int,
        out_ch: int,
        kernel: int,
        stride: int = 1,
        padding: int = 0,
        groups: int = 1,
        transposed: bool = False,
        zero_init: bool = False,
        bias: bool = True,
    ):
        self.spec = ops.ConvSpec(in_ch, out_ch, kernel, kernel, stride, padding, groups, transposed)
        shape = self.spec.weight_shape
        # fan-in counts the inputs feeding one output sample
        if transposed:
            fan_in = in_ch // groups * kernel * kernel // (stride * stride)
        else:
            fan_in = in_ch // groups * kernel * kernel
        w = np.zeros(shape) if zero_init else kaiming(rng, shape, max(fan_in, 1))
        self.weight = parameter(w)
        self.bias = parameter(np.zeros(out_ch)) if bias else None

    def __call__(self, x: Tensor) -> Tensor:
        return ops.conv2d(x, self.weight, self.bias, self.spec)


class PReLU(Module):
    def __init__(self, channels: int, init: float = 0.25):
        self.slopes = parameter(np.full(channels, init))

    def __call__(self, x: Tensor) -> Tensor:
        return ops.prelu(x, self.slopes)
