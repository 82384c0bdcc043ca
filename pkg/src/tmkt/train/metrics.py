"""Per-epoch metrics and their CSV log (header row, one line per epoch).

Floats are written with ``repr`` so every line parses back exactly. Wall
time is kept out of the metrics log and goes to a separate timing file, so
two runs with the same seed produce byte-identical metrics logs.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional

LOSS_FIELDS = ("cls_m", "cls_e", "rda", "mag", "mrp", "total")


@dataclass
class EpochMetrics:
    epoch: int
    losses: Dict[str, float]
    train_acc: float
    test_acc: float
    gate_means: List[float]
    wall_time: Optional[float] = field(default=None, compare=False)

    def __post_init__(self):
        for name in ("train_acc", "test_acc"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v} outside [0, 1]")

    def row(self) -> List[str]:
        values = [str(self.epoch)]
        values += [repr(float(self.losses[k])) for k in LOSS_FIELDS]
        values += [repr(float(self.train_acc)), repr(float(self.test_acc))]
        values += [repr(float(g)) for g in self.gate_means]
        return values

    @classmethod
    def from_row(cls, header: List[str], row: List[str]) -> "EpochMetrics":
        rec = dict(zip(header, row))
        gates = [float(rec[h]) for h in header if h.startswith("gate_")]
        return cls(
            epoch=int(rec["epoch"]),
            losses={k: float(rec[k]) for k in LOSS_FIELDS},
            train_acc=float(rec["train_acc"]),
            test_acc=float(rec["test_acc"]),
            gate_means=gates,
        )


def header(T: int) -> List[str]:
    return ["epoch", *LOSS_FIELDS, "train_acc", "test_acc", *[f"gate_{t}" for t in range(1, T + 1)]]


class MetricsLog:
    def __init__(self, path, T: int, timing_path=None):
        self.path = Path(path)
        self.timing_path = Path(timing_path) if timing_path else None
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self.path.write_text(",".join(header(T)) + "\n")
        if self.timing_path:
            self.timing_path.write_text("epoch,wall_seconds\n")

    def append(self, m: EpochMetrics) -> None:
        with self.path.open("a") as f:
            f.write(",".join(m.row()) + "\n")
        if self.timing_path and m.wall_time is not None:
            with self.timing_path.open("a") as f:
                f.write(f"{m.epoch},{m.wall_time:.3f}\n")


def read_metrics(path) -> List[EpochMetrics]:
    lines = Path(path).read_text().splitlines()
    head = lines[0].split(",")
    return [EpochMetrics.from_row(head, line.split(",")) for line in lines[1:] if line]
