"""Time-unrolled spiking networks.

All architectures share one layout: a trunk of conv + LIF blocks, a fully
connected LIF layer (the penultimate layer whose spikes ``F_t`` and residual
potentials ``V_t`` are exposed), then four linear heads reading ``F_t``:

* ``head_mixed`` / ``head_event`` - class logits for the mixed and event
  streams; the only weights the two streams do not share,
* ``mag_head`` - 2-way per-step modality logits,
* ``mrp_head`` - per-step mixup-ratio estimate, squashed by a sigmoid.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from ..autodiff import Tensor, avg_pool2d, conv2d, flatten, sigmoid, stack
from ..autodiff.tensor import ShapeError, get_default_dtype
from .neuron import LayerState, LIFParams, lif_step

ARCHS = ("scnn_small", "vgg_lite", "dense")

# (out_channels, pool_after) per conv block
_TRUNKS = {
    "scnn_small": [(8, True), (16, True)],
    "vgg_lite": [(16, False), (16, True), (32, True), (32, True)],
    "dense": [],
}
_HIDDEN = {"scnn_small": 64, "vgg_lite": 128, "dense": 32}
_DEFAULT_INPUT = {"scnn_small": (20, 20), "vgg_lite": (48, 48), "dense": (8, 8)}


def _uniform(rng, shape, fan_in, gain):
    bound = gain * np.sqrt(3.0 / fan_in)
    return rng.uniform(-bound, bound, size=shape).astype(get_default_dtype())


class Linear:
    """``x @ weight + bias`` with ``weight`` stored as (in, out)."""

    def __init__(self, name, n_in, n_out, rng, gain=1.0):
        self.name = name
        self.weight = Tensor(_uniform(rng, (n_in, n_out), n_in, gain), requires_grad=True)
        self.bias = Tensor(np.zeros(n_out, dtype=get_default_dtype()), requires_grad=True)

    def __call__(self, x: Tensor) -> Tensor:
        return x @ self.weight + self.bias

    def named_parameters(self):
        return [(f"{self.name}.weight", self.weight), (f"{self.name}.bias", self.bias)]


class Conv2d:
    def __init__(self, name, c_in, c_out, rng, k=3, stride=1, padding=1, gain=1.0):
        self.name = name
        self.stride, self.padding = stride, padding
        fan_in = c_in * k * k
        self.weight = Tensor(_uniform(rng, (c_out, c_in, k, k), fan_in, gain), requires_grad=True)
        self.bias = Tensor(np.zeros(c_out, dtype=get_default_dtype()), requires_grad=True)

    def __call__(self, x: Tensor) -> Tensor:
        return conv2d(x, self.weight, self.bias, stride=self.stride, padding=self.padding)

    def named_parameters(self):
        return [(f"{self.name}.weight", self.weight), (f"{self.name}.bias", self.bias)]


@dataclass
class NetworkActivations:
    """Per-step outputs of one forward pass over a batch of sequences.

    ``spikes`` and ``potentials`` hold the penultimate layer's ``F_t`` and
    post-reset ``V_t`` (each (N, hidden)); ``logits`` are the selected class
    head's outputs, ``mag_logits`` the modality logits and ``ratio_per_step``
    the sigmoid MRP outputs. ``pred_ratio`` is their time average, shape (N,).
    """

    head: str
    spikes: List[Tensor]
    potentials: List[Tensor]
    logits: List[Tensor]
    mag_logits: List[Tensor]
    ratio_per_step: List[Tensor]
    pred_ratio: Tensor

    @property
    def T(self) -> int:
        return len(self.spikes)

    @property
    def logits_mixed_head(self):
        return self.logits if self.head == "mixed" else None

    @property
    def logits_event_head(self):
        return self.logits if self.head == "event" else None

    def mean_logits(self) -> np.ndarray:
        return np.mean([lg.data for lg in self.logits], axis=0)


@dataclass
class Network:
    arch: str
    in_channels: int
    input_size: Tuple[int, int]
    n_classes: int
    hidden: int
    lif: LIFParams
    convs: List[Conv2d]
    pools: List[bool]
    fc: Linear
    head_mixed: Linear
    head_event: Linear
    mag_head: Linear
    mrp_head: Linear
    time_steps: Optional[int] = None
    extra: Dict[str, Tensor] = field(default_factory=dict)

    def named_parameters(self) -> List[Tuple[str, Tensor]]:
        out = []
        for layer in [*self.convs, self.fc, self.head_mixed, self.head_event, self.mag_head, self.mrp_head]:
            out.extend(layer.named_parameters())
        out.extend(self.extra.items())
        return out

    def state_dict(self) -> Dict[str, np.ndarray]:
        return {name: p.data for name, p in self.named_parameters()}

    def load_state_dict(self, arrays: Dict[str, np.ndarray], strict: bool = True) -> None:
        params = dict(self.named_parameters())
        missing = [k for k in params if k not in arrays]
        if strict and missing:
            raise KeyError(f"missing parameters: {missing}")
        for name, p in params.items():
            if name not in arrays:
                continue
            arr = np.asarray(arrays[name])
            if arr.shape != p.shape:
                raise ShapeError(f"{name}: checkpoint shape {arr.shape} != network shape {p.shape}")
            p.data[...] = arr

    def layer_shapes(self):
        """Yield (name, type, in_shape, out_shape, n_params) per layer for one sample."""
        c, (h, w) = self.in_channels, self.input_size
        for conv, pool in zip(self.convs, self.pools):
            o, _, k, _ = conv.weight.shape
            oh = (h + 2 * conv.padding - k) // conv.stride + 1
            ow = (w + 2 * conv.padding - k) // conv.stride + 1
            yield conv.name, "conv+lif", (c, h, w), (o, oh, ow), conv.weight.size + conv.bias.size
            c, h, w = o, oh, ow
            if pool:
                yield f"{conv.name}.pool", "avgpool2", (c, h, w), (c, h // 2, w // 2), 0
                h, w = h // 2, w // 2
        flat = c * h * w
        yield self.fc.name, "fc+lif", (flat,), (self.hidden,), self.fc.weight.size + self.fc.bias.size
        for head, kind in ((self.head_mixed, "linear"), (self.head_event, "linear"),
                           (self.mag_head, "linear"), (self.mrp_head, "linear+sigmoid")):
            n_out = head.weight.shape[1]
            yield head.name, kind, (self.hidden,), (n_out,), head.weight.size + head.bias.size

    def manifest(self) -> str:
        rows = [("layer", "type", "in", "out", "params")]
        total = 0
        for name, kind, s_in, s_out, n in self.layer_shapes():
            rows.append((name, kind, "x".join(map(str, s_in)), "x".join(map(str, s_out)), str(n)))
            total += n
        rows.append(("total", "", "", "", str(total)))
        widths = [max(len(r[i]) for r in rows) for i in range(5)]
        lines = ["  ".join(cell.ljust(wd) for cell, wd in zip(r, widths)).rstrip() for r in rows]
        lines.insert(1, "  ".join("-" * wd for wd in widths))
        return "\n".join(lines)


def build_network(
    arch: str,
    in_channels: int = 2,
    n_classes: int = 10,
    lif: LIFParams = LIFParams(),
    input_size: Optional[Tuple[int, int]] = None,
    hidden: Optional[int] = None,
    seed: int = 0,
    time_steps: Optional[int] = None,
    gain: float = 4.0,
) -> Network:
    """Build one of ``ARCHS`` with deterministic uniform initialisation."""
    if arch not in _TRUNKS:
        raise ValueError(f"unknown architecture {arch!r}; choose from {ARCHS}")
    if in_channels < 1 or n_classes < 2:
        raise ValueError("need in_channels >= 1 and n_classes >= 2")
    h, w = input_size or _DEFAULT_INPUT[arch]
    hidden = hidden or _HIDDEN[arch]
    rng = np.random.default_rng(seed)

    convs, pools = [], []
    c = in_channels
    for i, (c_out, pool) in enumerate(_TRUNKS[arch], start=1):
        convs.append(Conv2d(f"conv{i}", c, c_out, rng, gain=gain))
        pools.append(pool)
        c = c_out
        if pool:
            h, w = h // 2, w // 2
        if h < 1 or w < 1:
            raise ValueError(f"input {input_size} too small for {arch}")
    flat = c * h * w
    return Network(
        arch=arch,
        in_channels=in_channels,
        input_size=tuple(input_size or _DEFAULT_INPUT[arch]),
        n_classes=n_classes,
        hidden=hidden,
        lif=lif,
        convs=convs,
        pools=pools,
        fc=Linear("fc", flat, hidden, rng, gain=gain),
        head_mixed=Linear("head_mixed", hidden, n_classes, rng),
        head_event=Linear("head_event", hidden, n_classes, rng),
        mag_head=Linear("mag_head", hidden, 2, rng),
        mrp_head=Linear("mrp_head", hidden, 1, rng),
        time_steps=time_steps,
    )


def _as_batch(frames) -> np.ndarray:
    frames = getattr(frames, "frames", frames)
    arr = np.asarray(frames)
    if arr.ndim == 4:
        arr = arr[None]
    if arr.ndim != 5:
        raise ShapeError(f"expected frames of shape (N, T, C, H, W), got {arr.shape}")
    return arr


def snn_forward(net: Network, frames, head: str = "event") -> NetworkActivations:
    """Run all time-steps of ``frames`` (N, T, C, H, W) from zeroed membrane states.

    ``frames`` may also be a single (T, C, H, W) array or any object with a
    ``frames`` attribute (FrameSequence, MixedSample).
    """
    if head not in ("mixed", "event"):
        raise ValueError(f"head must be 'mixed' or 'event', got {head!r}")
    x_all = _as_batch(frames).astype(get_default_dtype(), copy=False)
    n, T = x_all.shape[:2]
    if net.time_steps is not None and T != net.time_steps:
        raise ShapeError(f"sequence has {T} steps, network expects {net.time_steps}")
    if x_all.shape[2] != net.in_channels or tuple(x_all.shape[3:]) != tuple(net.input_size):
        raise ShapeError(f"frame shape {x_all.shape[2:]} does not match network input "
                         f"{(net.in_channels, *net.input_size)}")
    cls_head = net.head_mixed if head == "mixed" else net.head_event

    states: List[Optional[LayerState]] = [None] * (len(net.convs) + 1)
    spikes, potentials, logits, mag, ratio = [], [], [], [], []
    for t in range(T):
        x = Tensor(x_all[:, t])
        for i, (conv, pool) in enumerate(zip(net.convs, net.pools)):
            current = conv(x)
            if states[i] is None:
                states[i] = LayerState.zeros(current.shape, current.dtype)
            x, states[i] = lif_step(states[i], current, net.lif)
            if pool:
                x = avg_pool2d(x, 2)
        current = net.fc(flatten(x))
        if states[-1] is None:
            states[-1] = LayerState.zeros(current.shape, current.dtype)
        f_t, states[-1] = lif_step(states[-1], current, net.lif)
        spikes.append(f_t)
        potentials.append(states[-1].u)
        logits.append(cls_head(f_t))
        mag.append(net.mag_head(f_t))
        ratio.append(sigmoid(net.mrp_head(f_t)).reshape(n))
    pred_ratio = stack(ratio, axis=0).mean(axis=0)
    return NetworkActivations(head, spikes, potentials, logits, mag, ratio, pred_ratio)
