"""Adam and the learning-rate schedules used for training."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .tensor import Tensor


@dataclass
class AdamState:
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)


class Adam:
    """Bias-corrected Adam over a name -> parameter mapping."""

    def __init__(self, params, lr: float = 1e-3, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.params: dict[str, Tensor] = dict(params)
        self.state = AdamState(lr, beta1, beta2, eps)

    def zero_grad(self):
        for p in self.params.values():
            p.grad = None

    def step(self, lr: float | None = None):
        st = self.state
        lr = st.lr if lr is None else lr
        for name, p in self.params.items():
            if p.grad is not None and not np.all(np.isfinite(p.grad)):
                raise FloatingPointError(f"non-finite gradient in parameter {name!r} at step {st.step}")
        st.step += 1
        t = st.step
        c1 = 1.0 - st.beta1**t
        c2 = 1.0 - st.beta2**t
        for name, p in self.params.items():
            g = p.grad if p.grad is not None else np.zeros_like(p.data)
            m = st.m.get(name)
            if m is None:
                m = np.zeros_like(p.data)
                v = np.zeros_like(p.data)
            else:
                v = st.v[name]
            m = st.beta1 * m + (1.0 - st.beta1) * g
            v = st.beta2 * v + (1.0 - st.beta2) * (g * g)
            st.m[name] = m
            st.v[name] = v
            update = lr * (m / c1) / (np.sqrt(v / c2) + st.eps)
            p.data = (p.data - update).astype(p.data.dtype)


def adam_step(params, grads, state: AdamState) -> dict[str, np.ndarray]:
    """Functional form: returns updated arrays and mutates ``state``."""
    opt = Adam({}, state.lr, state.beta1, state.beta2, state.eps)
    opt.state = state
    for name, value in params.items():
        t = Tensor(np.array(value, copy=True), requires_grad=True)
        t.grad = grads.get(name)
        opt.params[name] = t
    opt.step()
    return {name: t.data for name, t in opt.params.items()}


@dataclass(frozen=True)
class LrSchedule:
    kind: str = "step_decay"
    base_lr: float = 1e-3
    final_lr: float = 1e-6
    period: int = 100_000
    total_steps: int = 100_000

    def __post_init__(self):
        if self.kind not in ("step_decay", "cosine"):
            raise ValueError(f"unknown schedule kind {self.kind!r}")
        if not self.base_lr >= self.final_lr > 0:
            raise ValueError("need base_lr >= final_lr > 0")
        if self.period < 1 or self.total_steps < 1:
            raise ValueError("period and total_steps must be positive")


def lr_at(schedule: LrSchedule, step: int) -> float:
    if step < 0:
        raise ValueError(f"step must be >= 0, got {step}")
    if schedule.kind == "step_decay":
        return schedule.base_lr * 2.0 ** -(step // schedule.period)
    t = min(step, schedule.total_steps) / schedule.total_steps
    return schedule.final_lr + (schedule.base_lr - schedule.final_lr) * (1.0 + math.cos(math.pi * t)) / 2.0
