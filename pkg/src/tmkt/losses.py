"""Training objectives.

``total = cls_m + lambda * rda + mag + mrp`` where

* ``cls_m`` - TET (per-step cross-entropy, time-averaged) on the mixed head,
* ``rda``   - per-step gated blend of CKA misalignment between mixed and
  event penultimate potentials and an event-stream classification term,
* ``mag``   - per-step 2-way modality cross-entropy,
* ``mrp``   - squared error of the predicted appearance fraction.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, fields
from typing import Optional, Sequence

import numpy as np

from .autodiff import Tensor, cross_entropy, frobenius_norm, sigmoid, stack
from .autodiff.tensor import ShapeError, get_default_dtype

DEFAULT_LAMBDA = 0.5
RDA_MODES = ("per_step_ce", "constant_tet")


class NonFiniteLossError(FloatingPointError):
    def __init__(self, component: str, value: float):
        super().__init__(f"loss component {component!r} is not finite ({value})")
        self.component = component


def tet_loss(logits_per_step: Sequence[Tensor], labels) -> Tensor:
    """Mean over time-steps of the batch-mean cross-entropy."""
    if len(logits_per_step) < 1:
        raise ValueError("tet_loss needs at least one time-step")
    per_step = [cross_entropy(lg, labels) for lg in logits_per_step]
    return stack(per_step).mean()


def linear_cka(a: Tensor, b: Tensor) -> Tensor:
    """Linear CKA between (n, d1) and (n, d2) feature matrices.

    Columns are centred, then ``||B^T A||_F^2 / (||A^T A||_F ||B^T B||_F)``.
    A centred matrix that is identically zero gives 0.
    """
    if a.ndim != 2 or b.ndim != 2:
        raise ShapeError(f"linear_cka expects 2-d inputs, got {a.shape} and {b.shape}")
    if a.shape[0] != b.shape[0]:
        raise ShapeError(f"row counts differ: {a.shape[0]} vs {b.shape[0]}")
    a_c = a - a.mean(axis=0, keepdims=True)
    b_c = b - b.mean(axis=0, keepdims=True)
    sa, sb = float(np.max(np.abs(a_c.data))), float(np.max(np.abs(b_c.data)))
    if sa == 0.0 or sb == 0.0:
        return Tensor(0.0, dtype=a.dtype)
    # CKA is scale invariant; a detached rescale keeps tiny inputs from underflowing
    a_c, b_c = a_c * (1.0 / sa), b_c * (1.0 / sb)
    if not np.all(np.isfinite(a_c.data)) or not np.all(np.isfinite(b_c.data)):
        return Tensor(0.0, dtype=a.dtype)
    cross = frobenius_norm(b_c.T @ a_c)
    return cross * cross / (frobenius_norm(a_c.T @ a_c) * frobenius_norm(b_c.T @ b_c))


@dataclass
class AlignmentGates:
    """Learnable per-step logits ``theta``; the gate is ``sigmoid(theta)``."""

    theta: Tensor

    @classmethod
    def zeros(cls, T: int) -> "AlignmentGates":
        return cls(Tensor(np.zeros(T, dtype=get_default_dtype()), requires_grad=True, name="gates.theta"))

    @property
    def T(self) -> int:
        return self.theta.shape[0]

    def weights(self) -> np.ndarray:
        th = self.theta.data.astype(np.float64)
        z = np.exp(-np.abs(th))
        return np.where(th >= 0, 1.0 / (1.0 + z), z / (1.0 + z))


def rda_loss(v_mixed: Sequence[Tensor], v_event: Sequence[Tensor], event_logits: Sequence[Tensor],
             labels, gates: AlignmentGates, mode: str = "per_step_ce") -> Tensor:
    """Regularised domain alignment.

    ``mean_t[ g_t (1 - CKA(Vm_t, Ve_t)) + (1 - g_t) CE_t ]`` with ``g = sigmoid(theta)``.
    ``CE_t`` is the event head's cross-entropy at step t (``per_step_ce``) or
    the time-averaged TET loss at every step (``constant_tet``).
    """
    T = len(v_mixed)
    if not (len(v_event) == len(event_logits) == T == gates.T):
        raise ShapeError(f"step counts differ: mixed {T}, event {len(v_event)}, "
                         f"logits {len(event_logits)}, gates {gates.T}")
    if mode not in RDA_MODES:
        raise ValueError(f"unknown rda mode {mode!r}")
    g = sigmoid(gates.theta)
    misalign = stack([1.0 - linear_cka(vm, ve) for vm, ve in zip(v_mixed, v_event)])
    if mode == "per_step_ce":
        cls = stack([cross_entropy(lg, labels) for lg in event_logits])
    else:
        cls = tet_loss(event_logits, labels)
    return (g * misalign + (1.0 - g) * cls).mean()


def mag_loss(mag_logits: Sequence[Tensor], y_s) -> Tensor:
    """Mean over steps of the modality cross-entropy; ``y_s`` is (N, T) or (T,)."""
    y_s = np.asarray(y_s)
    if y_s.ndim == 1:
        y_s = y_s[None]
    if y_s.shape[1] != len(mag_logits):
        raise ShapeError(f"{len(mag_logits)} steps of logits but labels cover {y_s.shape[1]}")
    if np.any((y_s != 0) & (y_s != 1)):
        raise ValueError("modality labels must be 0 or 1")
    return stack([cross_entropy(lg, y_s[:, t]) for t, lg in enumerate(mag_logits)]).mean()


def mrp_loss(pred_ratio, y_m) -> Tensor:
    """Squared error ``(z_m - y_m)^2``, averaged over the batch."""
    pred = pred_ratio if isinstance(pred_ratio, Tensor) else Tensor(pred_ratio)
    target = np.asarray(y_m, dtype=pred.dtype)
    diff = pred - target
    return (diff * diff).mean()


@dataclass
class LossBundle:
    cls_m: Tensor
    cls_e: Tensor
    rda: Tensor
    mag: Tensor
    mrp: Tensor
    total: Tensor
    lam: float = DEFAULT_LAMBDA

    def as_floats(self) -> dict:
        return {f.name: float(getattr(self, f.name).item()) if f.name != "lam" else self.lam
                for f in fields(self)}


def _scalar(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(float(x))


def total_loss(cls_m, rda, mag, mrp, lam: Optional[float] = None, cls_e=0.0) -> LossBundle:
    """Combine the parts as ``cls_m + lam * rda + mag + mrp``.

    ``cls_e`` is carried for reporting only; inside the objective the event
    classification term lives in ``rda``.
    """
    lam = DEFAULT_LAMBDA if lam is None else lam
    parts = {"cls_m": _scalar(cls_m), "cls_e": _scalar(cls_e), "rda": _scalar(rda),
             "mag": _scalar(mag), "mrp": _scalar(mrp)}
    for name, value in parts.items():
        v = float(value.item())
        if not math.isfinite(v):
            raise NonFiniteLossError(name, v)
    total = parts["cls_m"] + parts["rda"] * lam + parts["mag"] + parts["mrp"]
    return LossBundle(total=total, lam=lam, **parts)
