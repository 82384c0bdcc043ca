"""Pure numpy versions of the compiled kernels.

Operation order follows ``_ext.pyx`` exactly so the two backends agree
bit for bit.
"""
import numpy as np


def _out_size(size, k, stride, pad):
    return (size + 2 * pad - k) // stride + 1


def im2col(x, kh, kw, stride, pad):
    x = np.ascontiguousarray(x)
    n, c, h, w = x.shape
    oh, ow = _out_size(h, kh, stride, pad), _out_size(w, kw, stride, pad)
    xp = np.pad(x, ((0, 0), (0, 0), (pad, pad), (pad, pad))) if pad else x
    cols = np.empty((n, c, kh, kw, oh, ow), dtype=x.dtype)
    for ki in range(kh):
        for kj in range(kw):
            cols[:, :, ki, kj] = xp[:, :, ki:ki + stride * oh:stride, kj:kj + stride * ow:stride]
    return np.ascontiguousarray(cols.transpose(0, 4, 5, 1, 2, 3)).reshape(n * oh * ow, c * kh * kw)


def col2im(cols, shape, kh, kw, stride, pad):
    n, c, h, w = shape
    oh, ow = _out_size(h, kh, stride, pad), _out_size(w, kw, stride, pad)
    d = cols.reshape(n, oh, ow, c, kh, kw).transpose(0, 3, 4, 5, 1, 2)
    out = np.zeros((n, c, h + 2 * pad, w + 2 * pad), dtype=cols.dtype)
    for ki in range(kh):
        for kj in range(kw):
            out[:, :, ki:ki + stride * oh:stride, kj:kj + stride * ow:stride] += d[:, :, ki, kj]
    if pad:
        out = out[:, :, pad:pad + h, pad:pad + w]
    return np.ascontiguousarray(out)


def lif_forward(prev, current, tau, v_th):
    dt = prev.dtype.type
    charged = prev * dt(tau) + current.astype(prev.dtype, copy=False)
    fired = charged - dt(v_th) >= 0
    spikes = fired.astype(prev.dtype)
    post = np.where(fired, dt(0), charged)
    return spikes, post, charged


def lif_backward(u, spikes, g_spikes, g_post, tau, v_th, width):
    dt = u.dtype.type
    sg = np.where(np.abs(u - dt(v_th)) < dt(width), dt(1.0 / (2.0 * width)), dt(0))
    through_post = (dt(1) - spikes) - u * sg
    du = g_spikes * sg + g_post * through_post
    return dt(tau) * du, du
