"""Appearance-to-event knowledge transfer for spiking neural networks via time-step mixup."""

__version__ = "0.1.0"
