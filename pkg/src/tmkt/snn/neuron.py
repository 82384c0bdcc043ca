"""Leaky integrate-and-fire dynamics.

One step per layer, read as charge, fire, reset::

    u      = tau * u_carried + I        # charge (leaky integration)
    s      = H(u - v_th)                # fire, with H(0) = 1
    u_next = u * (1 - s)                # reset; carried into the next step

The leak on the carried potential is applied at the next charge, so the
potential recorded after a step is the post-reset value.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..autodiff import Tensor, lif_update, surrogate_spike
from ..autodiff.tensor import ShapeError

__all__ = ["LIFParams", "LayerState", "lif_step", "surrogate_spike"]


@dataclass(frozen=True)
class LIFParams:
    tau: float = 0.5
    v_th: float = 1.0
    surrogate_width: float = 1.0

    def __post_init__(self):
        if not 0 < self.tau <= 1:
            raise ValueError(f"tau must lie in (0, 1], got {self.tau}")
        if not self.v_th > 0:
            raise ValueError(f"v_th must be positive, got {self.v_th}")
        if not self.surrogate_width > 0:
            raise ValueError(f"surrogate_width must be positive, got {self.surrogate_width}")


@dataclass
class LayerState:
    """Membrane potential of one layer, carried between time-steps."""

    u: Tensor

    @classmethod
    def zeros(cls, shape, dtype=None) -> "LayerState":
        dtype = dtype or Tensor(0.0).dtype
        return cls(Tensor(np.zeros(shape, dtype=dtype)))


def lif_step(state: LayerState, input_current: Tensor, params: LIFParams):
    """Advance one LIF layer by one time-step.

    Returns the spike tensor and the new state holding post-reset potentials.
    """
    if state.u.shape != input_current.shape:
        raise ShapeError(f"state {state.u.shape} does not match input current {input_current.shape}")
    spikes, post = lif_update(state.u, input_current, params.tau, params.v_th, params.surrogate_width)
    return spikes, LayerState(post)
