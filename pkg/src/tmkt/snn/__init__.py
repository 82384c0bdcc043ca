"""LIF neurons and time-unrolled spiking network architectures."""
from .network import ARCHS, Network, NetworkActivations, build_network, snn_forward
from .neuron import LayerState, LIFParams, lif_step, surrogate_spike

__all__ = [
    "ARCHS",
    "LIFParams",
    "LayerState",
    "Network",
    "NetworkActivations",
    "build_network",
    "lif_step",
    "snn_forward",
    "surrogate_spike",
]
