"""Event-head evaluation: argmax of time-averaged logits."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..autodiff import ShapeError, no_grad
from ..data import load_split
from ..snn import Network, snn_forward
from .checkpoints import load_network


@dataclass
class EvalResult:
    accuracy: float
    confusion: np.ndarray  # (C, C), rows are true classes
    n: int

    def report(self) -> str:
        lines = [f"accuracy {self.accuracy:.4f} ({int(np.trace(self.confusion))}/{self.n})", "confusion (rows=true):"]
        lines += [" ".join(f"{v:4d}" for v in row) for row in self.confusion]
        return "\n".join(lines)


def predict(net: Network, frames: np.ndarray, batch_size: int = 64, head: str = "event") -> np.ndarray:
    """Class predictions for (N, T, C, H, W) frames."""
    preds = []
    with no_grad():
        for start in range(0, len(frames), batch_size):
            acts = snn_forward(net, frames[start:start + batch_size], head=head)
            preds.append(np.argmax(acts.mean_logits(), axis=1))
    return np.concatenate(preds) if preds else np.zeros(0, dtype=np.int64)


def confusion_matrix(labels: np.ndarray, preds: np.ndarray, n_classes: int) -> np.ndarray:
    cm = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(cm, (labels, preds), 1)
    return cm


def evaluate_network(net: Network, frames: np.ndarray, labels: np.ndarray, batch_size: int = 64) -> EvalResult:
    labels = np.asarray(labels, dtype=np.int64)
    if len(labels) and labels.max() >= net.n_classes:
        raise ShapeError(f"label {labels.max()} outside the network's {net.n_classes} classes")
    preds = predict(net, frames, batch_size)
    cm = confusion_matrix(labels, preds, net.n_classes)
    acc = float(np.trace(cm) / len(labels)) if len(labels) else 0.0
    return EvalResult(acc, cm, len(labels))


def run_eval(checkpoint, data_dir, split: str = "test", batch_size: int = 64) -> EvalResult:
    if split not in ("train", "test"):
        raise ValueError(f"split must be train or test, got {split!r}")
    net, _ = load_network(checkpoint)
    pairs = load_split(data_dir, split)
    _, frames, labels = pairs.arrays()
    if frames is None:
        raise ShapeError(f"no event samples in {data_dir}/{split}")
    return evaluate_network(net, frames, labels, batch_size)
