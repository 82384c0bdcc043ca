"""SGD with momentum, bias-corrected Adam, and a cosine learning-rate schedule."""
from __future__ import annotations

import math
from typing import Iterable, Tuple, Union

import numpy as np

from .tensor import Tensor

NamedParams = Union[dict, Iterable[Tuple[str, Tensor]]]


class NonFiniteGradientError(FloatingPointError):
    def __init__(self, name: str):
        super().__init__(f"non-finite gradient for parameter {name!r}")
        self.param_name = name


def cosine_lr(base_lr: float, step: int, total_steps: int, min_lr: float = 0.0) -> float:
    """Cosine decay from ``base_lr`` at step 0 to ``min_lr`` at ``total_steps``."""
    if total_steps <= 0:
        return base_lr
    frac = min(max(step / total_steps, 0.0), 1.0)
    return min_lr + 0.5 * (base_lr - min_lr) * (1.0 + math.cos(math.pi * frac))


class _Optimizer:
    def __init__(self, params: NamedParams, lr: float):
        items = params.items() if isinstance(params, dict) else params
        self.params = [(name, p) for name, p in items]
        if not self.params:
            raise ValueError("optimizer got no parameters")
        self.lr = lr
        self.steps = 0

    def zero_grad(self) -> None:
        for _, p in self.params:
            p.zero_grad()

    def _checked_grads(self):
        for name, p in self.params:
            g = p.grad if p.grad is not None else np.zeros_like(p.data)
            if not np.all(np.isfinite(g)):
                raise NonFiniteGradientError(name)
            yield name, p, g

    def step(self) -> None:
        grads = list(self._checked_grads())
        self.steps += 1
        for name, p, g in grads:
            self._update(name, p, g)

    def _update(self, name, p, g):  # pragma: no cover - abstract
        raise NotImplementedError


class SGD(_Optimizer):
    def __init__(self, params: NamedParams, lr: float = 0.01, momentum: float = 0.0):
        super().__init__(params, lr)
        self.momentum = momentum
        self.velocity = {name: np.zeros_like(p.data) for name, p in self.params}

    def _update(self, name, p, g):
        v = self.velocity[name]
        if self.momentum:
            v *= self.momentum
            v += g
            g = v
        p.data -= p.dtype.type(self.lr) * g


class Adam(_Optimizer):
    def __init__(self, params: NamedParams, lr: float = 1e-3, betas=(0.9, 0.999), eps: float = 1e-8):
        super().__init__(params, lr)
        self.beta1, self.beta2 = betas
        self.eps = eps
        self.m = {name: np.zeros_like(p.data) for name, p in self.params}
        self.v = {name: np.zeros_like(p.data) for name, p in self.params}

    def _update(self, name, p, g):
        m, v = self.m[name], self.v[name]
        m *= self.beta1
        m += (1 - self.beta1) * g
        v *= self.beta2
        v += (1 - self.beta2) * g * g
        m_hat = m / (1 - self.beta1 ** self.steps)
        v_hat = v / (1 - self.beta2 ** self.steps)
        p.data -= (self.lr * m_hat / (np.sqrt(v_hat) + self.eps)).astype(p.dtype, copy=False)
