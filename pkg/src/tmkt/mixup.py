"""Truncated-geometric time-step mixup.

An appearance sequence is cut at a replacement point ``t*``: frames before it
stay appearance, frames from ``t*`` onward come from the class-matched event
sequence. ``t*`` is the first step whose uniform draw falls below ``p`` (or
``T + 1`` when none does), and ``p`` is solved so the expected number of
replaced frames equals ``T * r_m``.

Two expectations are supported:

``unconditional``
    ``E = sum_t P(t* <= t) = T - (1-p) (1 - (1-p)^T) / p``; spans [0, T].
``conditional``
    ``E = sum_t (T+1-t) (1-p)^(t-1) p / (1 - (1-p)^T)``, i.e. conditioned on
    a replacement happening at all. Its infimum (p -> 0) is (T+1)/2, so small
    ratios have no solution.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

MODES = ("unconditional", "conditional")
SCHEDULES = ("fixed", "linear", "nonlinear", "tsm")


class InfeasibleRatioError(ValueError):
    """The requested ratio lies outside the range of the chosen expectation."""

    def __init__(self, T: int, r_m: float, min_ratio: float):
        super().__init__(f"infeasible: min ratio {min_ratio:.4g} for T={T}, requested {r_m:.4g}")
        self.T = T
        self.r_m = r_m
        self.min_ratio = min_ratio


def _survival_sum(p: float, T: int) -> float:
    """1 - (1-p)^T, accurate for small p."""
    if p >= 1.0:
        return 1.0
    return -math.expm1(T * math.log1p(-p))


def expected_replaced(p: float, T: int, mode: str = "unconditional") -> float:
    """Expected number of event frames in a mixed sequence of length ``T``."""
    if mode == "unconditional":
        if p <= 0.0:
            return 0.0
        return T - (1.0 - p) * _survival_sum(p, T) / p
    if mode == "conditional":
        norm = 1.0 / T if p <= 0.0 else p / _survival_sum(p, T)
        q = 1.0 - p
        return sum((T + 1 - t) * q ** (t - 1) * norm for t in range(1, T + 1))
    raise ValueError(f"unknown expectation mode {mode!r}")


def min_feasible_ratio(T: int, mode: str) -> float:
    return (T + 1) / (2 * T) if mode == "conditional" else 0.0


@dataclass(frozen=True)
class MixupPolicy:
    T: int
    r_m: float
    p: float
    expectation_mode: str = "unconditional"

    @property
    def residual(self) -> float:
        return expected_replaced(self.p, self.T, self.expectation_mode) - self.T * self.r_m

    @classmethod
    def solve(cls, T: int, r_m: float, mode: str = "unconditional") -> "MixupPolicy":
        return cls(T, r_m, solve_replacement_prob(T, r_m, mode), mode)


@lru_cache(maxsize=4096)
def solve_replacement_prob(T: int, r_m: float, mode: str = "unconditional",
                           max_iter: int = 200, tol: float = 1e-12) -> float:
    """Per-step replacement probability whose expectation matches ``T * r_m``.

    Bisection on [0, 1]; the expectation is increasing in ``p`` under both modes.
    """
    if T < 1:
        raise ValueError(f"T must be >= 1, got {T}")
    if not 0.0 <= r_m <= 1.0:
        raise ValueError(f"r_m must lie in [0, 1], got {r_m}")
    if mode not in MODES:
        raise ValueError(f"unknown expectation mode {mode!r}")
    target = T * r_m

    def f(p):
        return expected_replaced(p, T, mode) - target

    lo, hi = 0.0, 1.0
    f_lo, f_hi = f(lo), f(hi)
    if f_lo > tol:
        raise InfeasibleRatioError(T, r_m, min_feasible_ratio(T, mode))
    if abs(f_lo) <= tol:
        return lo
    if abs(f_hi) <= tol:
        return hi
    mid = 0.5
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        f_mid = f(mid)
        if abs(f_mid) < tol:
            break
        if f_mid < 0:
            lo = mid
        else:
            hi = mid
    return mid


def sample_replacement_point(p: float, T: int, rng: np.random.Generator) -> int:
    """Draw ``u_t ~ U(0, 1)`` for t = 1..T and return the first t with ``u_t < p``.

    Returns ``T + 1`` when no draw succeeds. Consumes at most T draws.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    for t in range(1, T + 1):
        if rng.random() < p:
            return t
    return T + 1


def sample_replacement_points(p: float, T: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """Vectorised :func:`sample_replacement_point` for ``n`` sequences.

    Consumes exactly ``n * T`` draws (one full row per sequence) so the
    result depends only on the generator state, not on the outcomes.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    hits = rng.random((n, T)) < p
    first = np.argmax(hits, axis=1) + 1
    return np.where(hits.any(axis=1), first, T + 1).astype(np.int64)


def fixed_replacement_point(T: int, r_m: float) -> int:
    """Deterministic cut replacing ``floor(T * r_m)`` trailing frames."""
    n_replaced = int(math.floor(T * r_m + 1e-9))
    return T + 1 - min(max(n_replaced, 0), T)


@dataclass
class MixedSample:
    """A cut-and-spliced sequence with its auxiliary labels.

    ``y_s[t]`` is 1 for appearance frames and 0 for event frames; ``y_m`` is
    the appearance fraction ``(t_star - 1) / T``.
    """

    frames: np.ndarray
    t_star: int
    y_s: np.ndarray
    y_m: float
    class_label: int

    @property
    def T(self) -> int:
        return len(self.frames)


def modality_labels(t_star, T: int) -> np.ndarray:
    """Per-step modality labels for one t* or an array of them."""
    steps = np.arange(1, T + 1)
    return (steps < np.asarray(t_star)[..., None]).astype(np.int64)


def ratio_labels(t_star, T: int) -> np.ndarray:
    return (np.asarray(t_star) - 1) / T


def mix_sequences(appearance, event, t_star: int) -> MixedSample:
    """Splice two class-matched FrameSequences at ``t_star`` (1-based)."""
    if appearance.class_label != event.class_label:
        raise ValueError(f"class mismatch: appearance {appearance.class_label} vs event {event.class_label}")
    a, e = np.asarray(appearance.frames), np.asarray(event.frames)
    if a.shape != e.shape:
        raise ValueError(f"shape mismatch: appearance {a.shape} vs event {e.shape}")
    T = a.shape[0]
    if not 1 <= t_star <= T + 1:
        raise ValueError(f"t_star must lie in 1..{T + 1}, got {t_star}")
    frames = np.concatenate([a[: t_star - 1], e[t_star - 1:]], axis=0)
    return MixedSample(frames, int(t_star), modality_labels(t_star, T), (t_star - 1) / T,
                       int(appearance.class_label))


def mix_batch(appearance: np.ndarray, event: np.ndarray, t_star: np.ndarray):
    """Batched splice of (N, T, ...) arrays. Returns (frames, y_s (N, T), y_m (N,))."""
    if appearance.shape != event.shape:
        raise ValueError(f"shape mismatch: appearance {appearance.shape} vs event {event.shape}")
    n, T = appearance.shape[:2]
    t_star = np.asarray(t_star)
    y_s = modality_labels(t_star, T)
    mask = y_s.astype(bool).reshape(n, T, *([1] * (appearance.ndim - 2)))
    frames = np.where(mask, appearance, event)
    return frames, y_s, ratio_labels(t_star, T)


def schedule_ratio(kind: str, b_i: int = 0, b_l: int = 1, e_c: int = 0, e_m: int = 1,
                   r_m: float = 0.4) -> float:
    """Effective mixup ratio for the current batch.

    ``linear`` ramps by epoch as ``e_c / e_m``; ``nonlinear`` follows
    ``((b_i + e_c * b_l) / (e_m * b_l)) ** 3``; ``fixed`` and ``tsm`` return
    ``r_m`` (fixed uses a deterministic cut, tsm samples).
    """
    if kind not in SCHEDULES:
        raise ValueError(f"unknown schedule {kind!r}; choose from {SCHEDULES}")
    if b_l <= 0 or e_m <= 0:
        raise ValueError("b_l and e_m must be positive")
    if kind == "linear":
        r = e_c / e_m
    elif kind == "nonlinear":
        r = ((b_i + e_c * b_l) / (e_m * b_l)) ** 3
    else:
        r = r_m
    return min(max(r, 0.0), 1.0)


class TimeStepMixup:
    """Draws replacement points for a batch under a given schedule.

    Solved probabilities are cached per ratio, so schedules that change the
    ratio every batch re-solve only when the ratio changes.
    """

    def __init__(self, T: int, mode: str = "unconditional"):
        if mode not in MODES:
            raise ValueError(f"unknown expectation mode {mode!r}")
        self.T = T
        self.mode = mode

    def probability(self, ratio: float) -> float:
        return solve_replacement_prob(self.T, float(ratio), self.mode)

    def draw(self, kind: str, ratio: float, n: int, rng: Optional[np.random.Generator]) -> np.ndarray:
        if kind == "fixed":
            return np.full(n, fixed_replacement_point(self.T, ratio), dtype=np.int64)
        return sample_replacement_points(self.probability(ratio), self.T, n, rng)
