"""Static-image encoding: HSV value channel, replicated to two channels."""
from __future__ import annotations

import numpy as np

from .sequence import FrameSequence


def encode_appearance(rgb) -> np.ndarray:
    """Map an (H, W, 3) 8-bit RGB image to a (2, H, W) frame of ``V = max(R, G, B) / 255``.

    The value channel is stacked twice to match the two event polarities.
    """
    rgb = np.asarray(rgb)
    if rgb.size == 0:
        raise ValueError("empty image")
    if rgb.ndim != 3 or rgb.shape[2] != 3:
        raise ValueError(f"expected an (H, W, 3) image, got {rgb.shape}")
    if rgb.dtype != np.uint8:
        if np.any((rgb < 0) | (rgb > 255)) or np.any(rgb != np.round(rgb)):
            raise ValueError("RGB values must be integers in [0, 255]")
        rgb = rgb.astype(np.uint8)
    value = rgb.max(axis=2).astype(np.float32) / np.float32(255.0)
    return np.stack([value, value])


def tile_static_over_time(frame, T: int, class_label: int = 0) -> FrameSequence:
    """Repeat one frame ``T`` times as an appearance sequence."""
    if T < 1:
        raise ValueError(f"T must be >= 1, got {T}")
    frame = np.asarray(frame, dtype=np.float32)
    return FrameSequence(np.repeat(frame[None], T, axis=0), "appearance", class_label)
