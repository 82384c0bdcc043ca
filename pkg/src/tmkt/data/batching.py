"""Class-matched pair batching."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Optional

import numpy as np

from .synthetic import PairSet


@dataclass
class PairBatch:
    """Row i of ``appearance`` and ``event`` share ``classes[i]``; arrays are (n, T, 2, H, W).

    ``indices`` are the event samples' positions in their split.
    """

    appearance: np.ndarray
    event: np.ndarray
    classes: np.ndarray
    indices: np.ndarray

    def __len__(self):
        return len(self.classes)


class PairingError(ValueError):
    pass


def make_pair_batches(pairs: PairSet, batch_size: int, rng: np.random.Generator,
                      pairing: Optional[str] = None, arrays=None) -> Iterator[PairBatch]:
    """Shuffle the event samples and yield batches with class-matched appearance rows.

    ``pairing="index"`` pairs row i with row i; ``"class"`` draws a random
    appearance sample of the same class for every event sample. The default
    is ``"index"`` when the split is index-paired. The last partial batch is
    kept. ``arrays`` may pass precomputed ``pairs.arrays()``.
    """
    if batch_size < 1:
        raise ValueError("batch_size must be >= 1")
    pairing = pairing or ("index" if pairs.index_paired else "class")
    app, evt, labels = arrays if arrays is not None else pairs.arrays()
    app_labels = pairs.appearance_labels
    if pairing == "index" and not pairs.index_paired:
        raise PairingError("split is not index-paired")
    if pairing == "class":
        ev_classes, app_classes = set(labels.tolist()), set(app_labels.tolist())
        if ev_classes != app_classes:
            only = sorted(ev_classes ^ app_classes)
            raise PairingError(f"classes present in one modality only: {only}")
        pools = {c: np.flatnonzero(app_labels == c) for c in app_classes}
    elif pairing != "index":
        raise ValueError(f"unknown pairing {pairing!r}")

    order = rng.permutation(len(labels))
    for start in range(0, len(order), batch_size):
        idx = order[start:start + batch_size]
        cls = labels[idx]
        if pairing == "index":
            app_idx = idx
        else:
            app_idx = np.array([rng.choice(pools[c]) for c in cls], dtype=np.int64)
        yield PairBatch(app[app_idx], evt[idx], cls, idx)
