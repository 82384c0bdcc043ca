"""Differentiable operations on :class:`~tmkt.autodiff.tensor.Tensor`."""
from __future__ import annotations

from typing import Sequence

import numpy as np

from .. import kernels
from .tensor import ShapeError, Tensor


def as_tensor(x, dtype=None) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x, dtype=dtype)


# -- elementwise ---------------------------------------------------------


def add(a, b):
    return as_tensor(a) + b


def sub(a, b):
    return as_tensor(a) - b


def mul(a, b):
    return as_tensor(a) * b


def div(a, b):
    return as_tensor(a) / b


def power(a, exponent):
    return as_tensor(a) ** exponent


def exp(x: Tensor) -> Tensor:
    out = np.exp(x.data)
    return Tensor._from_op(out, (x,), lambda g: (g * out,))


def log(x: Tensor) -> Tensor:
    a = x.data
    return Tensor._from_op(np.log(a), (x,), lambda g: (g / a,))


def sigmoid(x: Tensor) -> Tensor:
    a = x.data
    # split on sign so neither branch overflows
    pos = a >= 0
    z = np.exp(np.where(pos, -a, a))
    out = np.where(pos, 1 / (1 + z), z / (1 + z)).astype(a.dtype, copy=False)
    return Tensor._from_op(out, (x,), lambda g: (g * out * (1 - out),))


def relu(x: Tensor) -> Tensor:
    a = x.data
    mask = (a > 0).astype(a.dtype)
    return Tensor._from_op(a * mask, (x,), lambda g: (g * mask,))


def sqrt(x: Tensor) -> Tensor:
    out = np.sqrt(x.data)
    return Tensor._from_op(out, (x,), lambda g: (g * 0.5 / out,))


# -- linear algebra ------------------------------------------------------


def matmul(a: Tensor, b: Tensor) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim != 2 or b.ndim != 2:
        raise ShapeError(f"matmul expects 2-d operands, got {a.shape} and {b.shape}")
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul inner dimensions differ: {a.shape} @ {b.shape}")
    x, y = a.data, b.data
    return Tensor._from_op(x @ y, (a, b), lambda g: (g @ y.T, x.T @ g))


def conv2d(x: Tensor, w: Tensor, bias: Tensor | None = None, stride: int = 1, padding: int = 0) -> Tensor:
    """2-d cross-correlation of ``x`` (N, C, H, W) with ``w`` (O, C, kh, kw)."""
    if x.ndim != 4 or w.ndim != 4:
        raise ShapeError(f"conv2d expects 4-d input and weight, got {x.shape} and {w.shape}")
    n, c, h, wd = x.shape
    o, wc, kh, kw = w.shape
    if wc != c:
        raise ShapeError(f"conv2d channel mismatch: input has {c}, weight expects {wc}")
    if stride < 1 or padding < 0:
        raise ValueError("stride must be >= 1 and padding >= 0")
    if kh > h + 2 * padding or kw > wd + 2 * padding:
        raise ShapeError(f"kernel {kh}x{kw} larger than padded input {h + 2 * padding}x{wd + 2 * padding}")
    oh = (h + 2 * padding - kh) // stride + 1
    ow = (wd + 2 * padding - kw) // stride + 1

    cols = kernels.im2col(x.data, kh, kw, stride, padding)
    wmat = w.data.reshape(o, -1)
    out = cols @ wmat.T
    if bias is not None:
        out = out + bias.data
    out = np.ascontiguousarray(out.reshape(n, oh, ow, o).transpose(0, 3, 1, 2))

    def backward(g):
        g2 = g.transpose(0, 2, 3, 1).reshape(-1, o)
        gw = (g2.T @ cols).reshape(w.shape)
        gx = kernels.col2im(g2 @ wmat, x.shape, kh, kw, stride, padding) if x.requires_grad else None
        gb = g2.sum(axis=0) if bias is not None else None
        return gx, gw, gb

    parents = (x, w) if bias is None else (x, w, bias)
    return Tensor._from_op(out, parents, backward)


def avg_pool2d(x: Tensor, k: int = 2) -> Tensor:
    n, c, h, w = x.shape
    oh, ow = h // k, w // k
    if oh == 0 or ow == 0:
        raise ShapeError(f"pool size {k} larger than input {h}x{w}")
    cropped = x.data[:, :, : oh * k, : ow * k]
    out = cropped.reshape(n, c, oh, k, ow, k).mean(axis=(3, 5))
    scale = x.dtype.type(1.0 / (k * k))

    def backward(g):
        up = np.repeat(np.repeat(g * scale, k, axis=2), k, axis=3)
        if up.shape == x.shape:
            return (up,)
        full = np.zeros(x.shape, dtype=x.dtype)
        full[:, :, : oh * k, : ow * k] = up
        return (full,)

    return Tensor._from_op(out, (x,), backward)


# -- reductions ----------------------------------------------------------


def _check_axis(x: Tensor, axis):
    if axis is None:
        if x.size == 0:
            raise ShapeError("reduction over an empty tensor")
        return
    axes = axis if isinstance(axis, tuple) else (axis,)
    for ax in axes:
        if not -x.ndim <= ax < x.ndim:
            raise ShapeError(f"axis {ax} out of range for shape {x.shape}")
        if x.shape[ax] == 0:
            raise ShapeError(f"reduction over empty axis {ax}")


def _expand(g, shape, axis, keepdims):
    if axis is not None and not keepdims:
        g = np.expand_dims(g, axis)
    return np.broadcast_to(g, shape)


def tsum(x: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    _check_axis(x, axis)
    shape = x.shape
    return Tensor._from_op(
        np.asarray(x.data.sum(axis=axis, keepdims=keepdims)),
        (x,),
        lambda g: (np.array(_expand(g, shape, axis, keepdims)),),
    )


def mean(x: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    _check_axis(x, axis)
    shape = x.shape
    count = x.size if axis is None else int(np.prod([shape[a] for a in np.atleast_1d(axis)]))
    scale = x.dtype.type(1.0 / count)
    return Tensor._from_op(
        np.asarray(x.data.mean(axis=axis, keepdims=keepdims)),
        (x,),
        lambda g: (np.array(_expand(g * scale, shape, axis, keepdims)),),
    )


def argmax(x, axis=None) -> np.ndarray:
    """Index of the maximum; ties resolve to the lowest index."""
    data = x.data if isinstance(x, Tensor) else np.asarray(x)
    if data.size == 0:
        raise ShapeError("argmax of an empty array")
    return np.argmax(data, axis=axis)


def tmax(x: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    """Maximum along ``axis``; the gradient goes to the first maximal entry."""
    if axis is not None and not isinstance(axis, int):
        raise ValueError("tmax reduces over a single axis")
    _check_axis(x, axis)
    a = x.data
    if axis is None:
        idx = np.unravel_index(np.argmax(a), a.shape)
        out = np.asarray(a[idx])
        if keepdims:
            out = out.reshape((1,) * a.ndim)

        def backward(g):
            full = np.zeros_like(a)
            full[idx] = np.asarray(g).reshape(())
            return (full,)

        return Tensor._from_op(out, (x,), backward)

    axis = axis % a.ndim
    idx = np.expand_dims(np.argmax(a, axis=axis), axis)
    out = np.take_along_axis(a, idx, axis=axis)
    if not keepdims:
        out = np.squeeze(out, axis=axis)

    def backward(g):
        full = np.zeros_like(a)
        gk = g if keepdims else np.expand_dims(g, axis)
        np.put_along_axis(full, idx, gk, axis=axis)
        return (full,)

    return Tensor._from_op(out, (x,), backward)


def frobenius_norm(x: Tensor) -> Tensor:
    a = x.data
    norm = np.sqrt(np.sum(a * a))

    def backward(g):
        if norm == 0:
            return (np.zeros_like(a),)
        return (g * a / norm,)

    return Tensor._from_op(np.asarray(norm, dtype=a.dtype), (x,), backward)


# -- structure -----------------------------------------------------------


def stack(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    tensors = [as_tensor(t) for t in tensors]
    if not tensors:
        raise ValueError("stack of an empty sequence")
    out = np.stack([t.data for t in tensors], axis=axis)

    def backward(g):
        return tuple(np.take(g, i, axis=axis) for i in range(len(tensors)))

    return Tensor._from_op(out, tensors, backward)


def flatten(x: Tensor) -> Tensor:
    return x.reshape(x.shape[0], -1)


# -- classification ------------------------------------------------------


def log_softmax(x: Tensor, axis: int = -1) -> Tensor:
    a = x.data
    shifted = a - a.max(axis=axis, keepdims=True)
    out = shifted - np.log(np.exp(shifted).sum(axis=axis, keepdims=True))
    soft = np.exp(out)
    return Tensor._from_op(out, (x,), lambda g: (g - soft * g.sum(axis=axis, keepdims=True),))


def cross_entropy(logits: Tensor, labels) -> Tensor:
    """Mean natural-log cross-entropy of ``logits`` (N, C) against integer labels."""
    labels = np.asarray(labels)
    if logits.ndim == 1:
        logits = logits.reshape(1, -1)
        labels = labels.reshape(1)
    n, c = logits.shape
    if labels.shape != (n,):
        raise ShapeError(f"{n} rows of logits but labels have shape {labels.shape}")
    if labels.size and (labels.min() < 0 or labels.max() >= c):
        raise ValueError(f"label out of range for {c} classes")
    onehot = np.zeros((n, c), dtype=logits.dtype)
    onehot[np.arange(n), labels.astype(np.int64)] = 1
    return -(log_softmax(logits, axis=1) * onehot).sum() * (1.0 / n)


# -- spiking -------------------------------------------------------------


def surrogate_spike(v: Tensor, width: float = 1.0) -> Tensor:
    """Heaviside forward (H(0) = 1); rectangular surrogate of height 1/(2a) on |v| < a backward."""
    a = v.data
    dt = a.dtype.type
    out = (a >= 0).astype(a.dtype)
    slope = np.where(np.abs(a) < dt(width), dt(1.0 / (2.0 * width)), dt(0))
    return Tensor._from_op(out, (v,), lambda g: (g * slope,))


def lif_update(prev: Tensor, current: Tensor, tau: float, v_th: float, width: float):
    """Fused charge, fire and reset for one LIF step.

    Returns ``(spikes, post)`` where ``post`` is the membrane potential after
    the reset, i.e. the value carried to the next step.
    """
    if prev.shape != current.shape:
        raise ShapeError(f"membrane state {prev.shape} and input current {current.shape} differ")
    spikes, post, charged = kernels.lif_forward(prev.data, current.data, tau, v_th)

    def backward(g):
        g_prev, g_cur = kernels.lif_backward(charged, spikes, g[0], g[1], tau, v_th, width)
        return g_prev, g_cur

    packed = Tensor._from_op(np.stack([spikes, post]), (prev, current), backward)
    if not packed.requires_grad:
        return Tensor(spikes, dtype=spikes.dtype), Tensor(post, dtype=post.dtype)
    return packed[0], packed[1]
