"""Hot kernels with a compiled backend and a numpy fallback.

The compiled extension is used when importable. Set ``TMKT_PURE_PYTHON=1``
to force the fallback, or call :func:`use_backend` at runtime.
"""
import os

from . import _fallback

try:
    from . import _ext
except ImportError:  # extension not built
    _ext = None

_BACKENDS = {"python": _fallback}
if _ext is not None:
    _BACKENDS["compiled"] = _ext

_active = None


def available_backends():
    return sorted(_BACKENDS)


def use_backend(name):
    """Switch every kernel to ``name`` ("compiled" or "python")."""
    global _active, im2col, col2im, lif_forward, lif_backward
    if name not in _BACKENDS:
        raise ValueError(f"kernel backend {name!r} unavailable; have {available_backends()}")
    mod = _BACKENDS[name]
    im2col = mod.im2col
    col2im = mod.col2im
    lif_forward = mod.lif_forward
    lif_backward = mod.lif_backward
    _active = name


def active_backend():
    return _active


if _ext is not None and os.environ.get("TMKT_PURE_PYTHON", "") not in ("1", "true"):
    use_backend("compiled")
else:
    use_backend("python")
