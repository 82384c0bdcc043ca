"""Minimal dense-tensor engine with reverse-mode autodiff."""
from .checkpoint import CheckpointError, load_checkpoint, save_checkpoint
from .ops import (
    argmax,
    as_tensor,
    avg_pool2d,
    conv2d,
    cross_entropy,
    exp,
    flatten,
    frobenius_norm,
    lif_update,
    log,
    log_softmax,
    matmul,
    mean,
    relu,
    sigmoid,
    sqrt,
    stack,
    surrogate_spike,
    tmax,
    tsum,
)
from .optim import SGD, Adam, NonFiniteGradientError, cosine_lr
from .tensor import ShapeError, Tensor, get_default_dtype, no_grad, precision, set_default_dtype

__all__ = [
    "Adam",
    "CheckpointError",
    "NonFiniteGradientError",
    "SGD",
    "ShapeError",
    "Tensor",
    "argmax",
    "as_tensor",
    "avg_pool2d",
    "conv2d",
    "cosine_lr",
    "cross_entropy",
    "exp",
    "flatten",
    "frobenius_norm",
    "get_default_dtype",
    "lif_update",
    "load_checkpoint",
    "log",
    "log_softmax",
    "matmul",
    "mean",
    "no_grad",
    "precision",
    "relu",
    "save_checkpoint",
    "set_default_dtype",
    "sigmoid",
    "sqrt",
    "stack",
    "surrogate_spike",
    "tmax",
    "tsum",
]
