"""Network checkpoints: parameters, alignment gates and a few rank-0 ``meta.*`` entries.

The meta entries record what is needed to rebuild the network before loading
its weights (architecture, input geometry, LIF constants).
"""
from __future__ import annotations

from typing import Optional, Tuple

import numpy as np

from ..autodiff import CheckpointError, load_checkpoint, save_checkpoint
from ..losses import AlignmentGates
from ..snn import ARCHS, LIFParams, Network, build_network

GATES_KEY = "gates.theta"
_META = ("arch", "in_channels", "n_classes", "height", "width", "hidden", "time_steps",
         "tau", "v_th", "surrogate_width")


def save_network(path, net: Network, gates: Optional[AlignmentGates] = None) -> None:
    arrays = dict(net.state_dict())
    if gates is not None:
        arrays[GATES_KEY] = gates.theta.data
    meta = {
        "arch": ARCHS.index(net.arch),
        "in_channels": net.in_channels,
        "n_classes": net.n_classes,
        "height": net.input_size[0],
        "width": net.input_size[1],
        "hidden": net.hidden,
        "time_steps": net.time_steps or 0,
        "tau": net.lif.tau,
        "v_th": net.lif.v_th,
        "surrogate_width": net.lif.surrogate_width,
    }
    for key in _META:
        arrays[f"meta.{key}"] = np.array(meta[key], dtype=np.float32)
    save_checkpoint(path, arrays)


def load_network(path) -> Tuple[Network, Optional[AlignmentGates]]:
    arrays = load_checkpoint(path)
    missing = [k for k in _META if f"meta.{k}" not in arrays]
    if missing:
        raise CheckpointError(f"{path}: missing meta entries {missing}")
    meta = {k: arrays.pop(f"meta.{k}").item() for k in _META}
    arch_id = int(meta["arch"])
    if not 0 <= arch_id < len(ARCHS):
        raise CheckpointError(f"{path}: unknown architecture id {arch_id}")
    lif = LIFParams(tau=float(meta["tau"]), v_th=float(meta["v_th"]),
                    surrogate_width=float(meta["surrogate_width"]))
    net = build_network(
        ARCHS[arch_id],
        in_channels=int(meta["in_channels"]),
        n_classes=int(meta["n_classes"]),
        lif=lif,
        input_size=(int(meta["height"]), int(meta["width"])),
        hidden=int(meta["hidden"]),
        time_steps=int(meta["time_steps"]) or None,
    )
    gates = None
    if GATES_KEY in arrays:
        gates = AlignmentGates.zeros(len(arrays[GATES_KEY]))
        gates.theta.data[...] = arrays.pop(GATES_KEY)
    net.load_state_dict(arrays)
    return net, gates
