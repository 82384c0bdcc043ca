"""Training configuration and its flat ``key=value`` file format.

Nested sections use dotted keys (``lif.tau=0.5``, ``optimizer.lr=1e-3``).
Blank lines and ``#`` comments are ignored.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict

from ..losses import RDA_MODES
from ..mixup import MODES, SCHEDULES, min_feasible_ratio
from ..snn import ARCHS


class ConfigError(ValueError):
    pass


@dataclass
class LIFConfig:
    tau: float = 0.5
    v_th: float = 1.0
    surrogate_width: float = 1.0


@dataclass
class OptimizerConfig:
    kind: str = "adam"
    lr: float = 1e-3
    momentum: float = 0.9
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    schedule: str = "cosine"  # or "constant"


@dataclass
class TrainConfig:
    arch: str = "scnn_small"
    T: int = 6
    r_m: float = 0.4
    expectation_mode: str = "unconditional"
    schedule_kind: str = "tsm"
    lam: float = 0.5
    lif: LIFConfig = field(default_factory=LIFConfig)
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    epochs: int = 30
    batch_size: int = 16
    seed: int = 0
    data_dir: str = ""
    out_dir: str = "runs/default"
    rda_regularizer_mode: str = "per_step_ce"
    # "tmkt" trains both streams; "event_only" is the plain TET baseline
    method: str = "tmkt"
    use_tsm: bool = True
    use_mag: bool = True
    use_mrp: bool = True
    use_rda: bool = True
    fresh_t_star: bool = True
    hidden: int = 0
    init_gain: float = 4.0
    # synthetic data used when data_dir is empty
    synth_classes: int = 5
    synth_per_class: int = 40
    synth_size: int = 20
    synth_seed: int = 0

    def validate(self) -> "TrainConfig":
        checks = [
            (self.arch in ARCHS, f"arch must be one of {ARCHS}"),
            (self.T >= 1, "T must be >= 1"),
            (0.0 <= self.r_m <= 1.0, "r_m must lie in [0, 1]"),
            (self.expectation_mode in MODES, f"expectation_mode must be one of {MODES}"),
            (self.schedule_kind in SCHEDULES, f"schedule_kind must be one of {SCHEDULES}"),
            (self.lam >= 0, "lam must be >= 0"),
            (0 < self.lif.tau <= 1, "lif.tau must lie in (0, 1]"),
            (self.lif.v_th > 0, "lif.v_th must be positive"),
            (self.lif.surrogate_width > 0, "lif.surrogate_width must be positive"),
            (self.optimizer.kind in ("adam", "sgd"), "optimizer.kind must be adam or sgd"),
            (self.optimizer.lr > 0, "optimizer.lr must be positive"),
            (self.optimizer.schedule in ("cosine", "constant"), "optimizer.schedule must be cosine or constant"),
            (self.epochs >= 1, "epochs must be >= 1"),
            (self.batch_size >= 1, "batch_size must be >= 1"),
            (self.rda_regularizer_mode in RDA_MODES, f"rda_regularizer_mode must be one of {RDA_MODES}"),
            (self.method in ("tmkt", "event_only"), "method must be tmkt or event_only"),
        ]
        for ok, msg in checks:
            if not ok:
                raise ConfigError(msg)
        floor = min_feasible_ratio(self.T, self.expectation_mode)
        if self.use_tsm and self.schedule_kind == "tsm" and self.r_m < floor:
            raise ConfigError(f"infeasible: min ratio {floor:.4g} for T={self.T} in {self.expectation_mode} mode")
        return self

    def to_flat(self) -> Dict[str, Any]:
        return _flatten(dataclasses.asdict(self))

    def dumps(self) -> str:
        return "".join(f"{k}={_fmt(v)}\n" for k, v in self.to_flat().items())

    def replace(self, **overrides) -> "TrainConfig":
        cfg = from_flat({**self.to_flat(), **overrides})
        return cfg


def _flatten(d, prefix=""):
    out = {}
    for k, v in d.items():
        if isinstance(v, dict):
            out.update(_flatten(v, f"{prefix}{k}."))
        else:
            out[f"{prefix}{k}"] = v
    return out


def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    return str(v)


def _coerce(raw, kind, key):
    if not isinstance(raw, str):
        return kind(raw)
    try:
        if kind is bool:
            low = raw.strip().lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        return kind(raw.strip())
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {raw!r} as {kind.__name__}") from None


_TYPES = {"int": int, "float": float, "str": str, "bool": bool}
_ALIASES = {"lambda": "lam"}


def from_flat(values: Dict[str, Any]) -> TrainConfig:
    sections = {f.name: f for f in dataclasses.fields(TrainConfig)}
    top, nested = {}, {"lif": {}, "optimizer": {}}
    for key, raw in values.items():
        key = _ALIASES.get(key, key)
        head, _, tail = key.partition(".")
        if tail:
            if head not in nested:
                raise ConfigError(f"unknown config key {key!r}")
            cls = LIFConfig if head == "lif" else OptimizerConfig
            sub = {f.name: f for f in dataclasses.fields(cls)}
            if tail not in sub:
                raise ConfigError(f"unknown config key {key!r}")
            nested[head][tail] = _coerce(raw, _TYPES[sub[tail].type], key)
        else:
            if key not in sections or key in nested:
                raise ConfigError(f"unknown config key {key!r}")
            top[key] = _coerce(raw, _TYPES[sections[key].type], key)
    cfg = TrainConfig(lif=LIFConfig(**nested["lif"]), optimizer=OptimizerConfig(**nested["optimizer"]), **top)
    return cfg.validate()


def parse_config(text: str) -> TrainConfig:
    values = {}
    for n, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {n}: expected key=value, got {line!r}")
        key, value = line.split("=", 1)
        values[key.strip()] = value.strip()
    return from_flat(values)


def load_config(path) -> TrainConfig:
    return parse_config(Path(path).read_text())
