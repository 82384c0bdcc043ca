"""Integration of (timestamp, x, y, polarity) event streams into frames."""
from __future__ import annotations

from typing import Optional

import numpy as np

from .sequence import FrameSequence

DEFAULT_CAP = 5


def _as_event_array(events) -> np.ndarray:
    arr = np.asarray(events, dtype=np.float64)
    if arr.size == 0:
        return np.zeros((0, 4))
    if arr.ndim != 2 or arr.shape[1] != 4:
        raise ValueError(f"events must be (N, 4) rows of (t, x, y, p), got {arr.shape}")
    return arr


def event_counts(events, T: int, H: int, W: int, t_start: Optional[float] = None,
                 t_end: Optional[float] = None) -> np.ndarray:
    """Raw per-bin, per-polarity, per-pixel counts, shape (T, 2, H, W).

    The span [t_start, t_end] (default: first to last timestamp) is cut into T
    equal bins; an event at t_end falls in the last bin. Positive polarity
    goes to channel 0, zero or negative polarity to channel 1.
    """
    ev = _as_event_array(events)
    counts = np.zeros((T, 2, H, W), dtype=np.int64)
    if len(ev) == 0:
        return counts
    ts, xs, ys, ps = ev.T
    if np.any(np.diff(ts) < 0):
        raise ValueError("timestamps must be sorted ascending")
    xi, yi = xs.astype(np.int64), ys.astype(np.int64)
    if np.any((xi < 0) | (xi >= W) | (yi < 0) | (yi >= H)) or np.any(xi != xs) or np.any(yi != ys):
        raise ValueError("event coordinates out of bounds")
    t0 = ts[0] if t_start is None else t_start
    t1 = ts[-1] if t_end is None else t_end
    if np.any(ts < t0) or np.any(ts > t1):
        raise ValueError("event timestamps outside the integration window")
    span = t1 - t0
    if span > 0:
        bins = np.minimum(np.floor((ts - t0) / span * T).astype(np.int64), T - 1)
    else:
        bins = np.zeros(len(ts), dtype=np.int64)
    channel = np.where(ps > 0, 0, 1)
    np.add.at(counts, (bins, channel, yi, xi), 1)
    return counts


def integrate_events(events, T: int, H: int, W: int, class_label: int = 0, cap: int = DEFAULT_CAP,
                     t_start: Optional[float] = None, t_end: Optional[float] = None) -> FrameSequence:
    """Bin events into T frames; counts are clipped at ``cap`` and divided by it."""
    if cap < 1:
        raise ValueError("cap must be >= 1")
    counts = event_counts(events, T, H, W, t_start, t_end)
    frames = np.minimum(counts, cap).astype(np.float32) / np.float32(cap)
    return FrameSequence(frames, "event", class_label)
