import numpy as np
import pytest

from tmkt import kernels
from tmkt.kernels import _fallback

compiled = pytest.mark.skipif("compiled" not in kernels.available_backends(), reason="extension not built")


@pytest.fixture
def backend():
    old = kernels.active_backend()
    yield kernels.use_backend
    kernels.use_backend(old)


def test_fallback_always_available():
    assert "python" in kernels.available_backends()


def test_unknown_backend_rejected():
    with pytest.raises(ValueError):
        kernels.use_backend("gpu")


def test_switching_rebinds_kernels(backend):
    backend("python")
    assert kernels.active_backend() == "python"
    assert kernels.im2col is _fallback.im2col


def test_im2col_matches_patch_extraction(rng):
    x = rng.normal(size=(2, 3, 5, 4))
    cols = _fallback.im2col(x, 3, 2, 2, 1)
    xp = np.pad(x, ((0, 0), (0, 0), (1, 1), (1, 1)))
    oh, ow = (5 + 2 - 3) // 2 + 1, (4 + 2 - 2) // 2 + 1
    rows = [xp[n, :, 2 * i:2 * i + 3, 2 * j:2 * j + 2].reshape(-1)
            for n in range(2) for i in range(oh) for j in range(ow)]
    np.testing.assert_array_equal(cols, np.array(rows))


def test_col2im_is_adjoint_of_im2col(rng):
    # <im2col(x), c> == <x, col2im(c)>
    x = rng.normal(size=(2, 3, 6, 5))
    cols = _fallback.im2col(x, 3, 3, 2, 1)
    c = rng.normal(size=cols.shape)
    back = _fallback.col2im(c, x.shape, 3, 3, 2, 1)
    assert np.sum(cols * c) == pytest.approx(np.sum(x * back), rel=1e-12)


CASES = [((2, 3, 7, 6), 3, 3, 1, 1), ((1, 2, 5, 5), 3, 2, 2, 0), ((3, 1, 4, 9), 2, 3, 3, 2), ((1, 4, 1, 1), 1, 1, 1, 0)]


@compiled
@pytest.mark.parametrize("dtype", [np.float32, np.float64])
@pytest.mark.parametrize("shape,kh,kw,stride,pad", CASES)
def test_backends_bitwise_equal_conv(dtype, shape, kh, kw, stride, pad, rng):
    ext = kernels._BACKENDS["compiled"]
    x = rng.normal(size=shape).astype(dtype)
    a, b = ext.im2col(x, kh, kw, stride, pad), _fallback.im2col(x, kh, kw, stride, pad)
    assert a.dtype == b.dtype and a.tobytes() == b.tobytes()
    c = rng.normal(size=a.shape).astype(dtype)
    a, b = ext.col2im(c, shape, kh, kw, stride, pad), _fallback.col2im(c, shape, kh, kw, stride, pad)
    assert a.dtype == b.dtype and a.tobytes() == b.tobytes()


@compiled
@pytest.mark.parametrize("dtype", [np.float32, np.float64])
def test_backends_bitwise_equal_lif(dtype, rng):
    ext = kernels._BACKENDS["compiled"]
    prev = rng.normal(size=(4, 3, 5)).astype(dtype)
    cur = rng.normal(size=(4, 3, 5)).astype(dtype)
    cur[0, 0, :2] = (1.0 - 0.5 * prev[0, 0, :2]).astype(dtype)  # land on the threshold
    fa, fb = ext.lif_forward(prev, cur, 0.5, 1.0), _fallback.lif_forward(prev, cur, 0.5, 1.0)
    for a, b in zip(fa, fb):
        assert a.tobytes() == b.tobytes()
    gs, gp = rng.normal(size=prev.shape).astype(dtype), rng.normal(size=prev.shape).astype(dtype)
    ba = ext.lif_backward(fa[2], fa[0], gs, gp, 0.5, 1.0, 0.7)
    bb = _fallback.lif_backward(fb[2], fb[0], gs, gp, 0.5, 1.0, 0.7)
    for a, b in zip(ba, bb):
        assert a.tobytes() == b.tobytes()


@compiled
def test_training_step_identical_across_backends(backend):
    from tmkt.train import TrainConfig, run_training
    from tmkt.data import gen_synthetic_paired

    ds = gen_synthetic_paired(3, 4, 12, 12, 3, seed=0)
    cfg = TrainConfig(T=3, epochs=1, batch_size=6)
    states = []
    for name in ("compiled", "python"):
        backend(name)
        r = run_training(cfg, dataset=ds, write=False)
        states.append({k: v.tobytes() for k, v in r.net.state_dict().items()})
    assert states[0] == states[1]
