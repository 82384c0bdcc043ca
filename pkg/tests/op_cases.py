"""Finite-difference cases for every differentiable op, shared by the op tests and the acceptance sweep."""
import numpy as np

from gradcheck import check
from tmkt.autodiff import (
    Tensor,
    avg_pool2d,
    conv2d,
    cross_entropy,
    exp,
    frobenius_norm,
    log,
    log_softmax,
    matmul,
    relu,
    sigmoid,
    sqrt,
    stack,
    tmax,
)


def positive(rng, shape):
    return rng.uniform(0.5, 2.0, size=shape)


UNARY = {
    "exp": (lambda x: exp(x).sum(), lambda r: r.normal(size=(3, 4))),
    "log": (lambda x: log(x).sum(), lambda r: positive(r, (3, 4))),
    "sigmoid": (lambda x: (sigmoid(x) * sigmoid(x)).sum(), lambda r: r.normal(size=(3, 4))),
    # keep entries away from the kink at 0
    "relu": (lambda x: (relu(x) * x).sum(), lambda r: r.choice([-1, 1], size=(3, 4)) * positive(r, (3, 4))),
    "sqrt": (lambda x: sqrt(x).sum(), lambda r: positive(r, (3, 4))),
    "neg": (lambda x: (-x * x).sum(), lambda r: r.normal(size=(5,))),
    "power": (lambda x: (x ** 3.0).sum() + (x ** -0.5).sum(), lambda r: positive(r, (2, 3))),
    "sum_axis": (lambda x: (x.sum(axis=1) ** 2.0).sum(), lambda r: r.normal(size=(3, 4))),
    "mean_axis": (lambda x: (x.mean(axis=0, keepdims=True) ** 2.0).sum(), lambda r: r.normal(size=(3, 4))),
    "max_axis": (lambda x: (tmax(x, axis=1) ** 2.0).sum(), lambda r: r.permutation(12).reshape(3, 4) * 0.3),
    "max_all": (lambda x: tmax(x) * 2.0, lambda r: r.permutation(12).reshape(3, 4) * 0.3),
    "frobenius_norm": (lambda x: frobenius_norm(x), lambda r: r.normal(size=(4, 3))),
    "reshape_transpose": (lambda x: (x.reshape(4, 3).T * Tensor(np.arange(12.0).reshape(3, 4))).sum(),
                          lambda r: r.normal(size=(2, 6))),
    "getitem_basic": (lambda x: (x[1:, ::2] ** 2.0).sum(), lambda r: r.normal(size=(3, 4))),
    "getitem_advanced": (lambda x: (x[np.array([0, 2, 0])] ** 2.0).sum(), lambda r: r.normal(size=(3, 4))),
    "log_softmax": (lambda x: (log_softmax(x) * Tensor(np.arange(8.0).reshape(2, 4))).sum(),
                    lambda r: r.normal(size=(2, 4))),
    "cross_entropy": (lambda x: cross_entropy(x, np.array([0, 2, 1])), lambda r: r.normal(size=(3, 4))),
    "avg_pool2d": (lambda x: (avg_pool2d(x, 2) ** 2.0).sum(), lambda r: r.normal(size=(1, 2, 5, 4))),
}


BINARY = {
    "add_broadcast": lambda a, b: ((a + b) ** 2.0).sum(),
    "sub_broadcast": lambda a, b: ((a - b) ** 2.0).sum(),
    "mul_broadcast": lambda a, b: (a * b * a).sum(),
    "div_broadcast": lambda a, b: (a / b).sum(),
    "stack": lambda a, b: (stack([a, b * 2.0]) ** 2.0).sum(),
}



def binary_inputs(name, r):
    a = r.normal(size=(3, 4))
    b = positive(r, (3, 4)) if name == "stack" else positive(r, (1, 4))
    return [a, b]


CONV_SETTINGS = [(1, 0), (1, 1), (2, 1)]


def matmul_error(r):
    return check(lambda a, b: (matmul(a, b) ** 2.0).sum(), [r.normal(size=(4, 3)), r.normal(size=(3, 2))])


def conv_error(r, stride, pad):
    x, w, b = r.normal(size=(1, 2, 5, 5)), r.normal(size=(3, 2, 3, 3)), r.normal(size=(3,))
    return check(lambda x, w, b: (conv2d(x, w, b, stride=stride, padding=pad) ** 2.0).sum(), [x, w, b])


def all_op_errors(seeds):
    """Worst relative error per op over the given seeds (run under float64)."""
    errs = {}
    for s in seeds:
        r = np.random.default_rng(s)
        for name, (build, make) in UNARY.items():
            errs[name] = max(errs.get(name, 0.0), check(build, [make(r)]))
        for name, build in BINARY.items():
            errs[name] = max(errs.get(name, 0.0), check(build, binary_inputs(name, r)))
        errs["matmul"] = max(errs.get("matmul", 0.0), matmul_error(r))
        for stride, pad in CONV_SETTINGS:
            key = f"conv2d_s{stride}_p{pad}"
            errs[key] = max(errs.get(key, 0.0), conv_error(r, stride, pad))
    return errs
