from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MODALITIES = ("event", "appearance")  # index = on-disk modality code


@dataclass
class FrameSequence:
    """T frames of shape (2, H, W) with values in [0, 1]."""

    frames: np.ndarray
    modality: str
    class_label: int

    def __post_init__(self):
        if self.modality not in MODALITIES:
            raise ValueError(f"unknown modality {self.modality!r}")
        self.frames = np.asarray(self.frames, dtype=np.float32)
        if self.frames.ndim != 4:
            raise ValueError(f"frames must be (T, C, H, W), got {self.frames.shape}")

    @property
    def T(self) -> int:
        return self.frames.shape[0]

    @property
    def steps(self):
        return list(self.frames)

    def __eq__(self, other):
        if not isinstance(other, FrameSequence):
            return NotImplemented
        return (self.modality == other.modality and self.class_label == other.class_label
                and self.frames.shape == other.frames.shape
                and self.frames.tobytes() == other.frames.tobytes())
