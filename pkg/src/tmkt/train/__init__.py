"""Configuration, dual-stream training loop, evaluation and metrics."""
from .checkpoints import load_network, save_network
from .config import ConfigError, LIFConfig, OptimizerConfig, TrainConfig, load_config, parse_config
from .evaluate import EvalResult, confusion_matrix, evaluate_network, predict, run_eval
from .loop import TrainingAborted, TrainResult, batch_losses, load_training_data, run_training
from .metrics import EpochMetrics, MetricsLog, read_metrics

__all__ = [
    "ConfigError",
    "EpochMetrics",
    "EvalResult",
    "LIFConfig",
    "MetricsLog",
    "OptimizerConfig",
    "TrainConfig",
    "TrainResult",
    "TrainingAborted",
    "batch_losses",
    "confusion_matrix",
    "evaluate_network",
    "load_config",
    "load_network",
    "load_training_data",
    "parse_config",
    "predict",
    "read_metrics",
    "run_eval",
    "run_training",
    "save_network",
]
