# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels: im2col/col2im for convolution and the fused LIF update.

Every kernel mirrors ``_fallback.py`` operation for operation so both backends
produce bitwise-identical results (same rounding sequence, same accumulation
order per output cell).
"""
import numpy as np
cimport numpy as cnp
from cython cimport floating

cnp.import_array()


def _im2col(floating[:, :, :, ::1] x, floating[:, ::1] cols,
            int kh, int kw, int stride, int pad, int oh, int ow):
    cdef Py_ssize_t n_batch = x.shape[0], chans = x.shape[1]
    cdef Py_ssize_t height = x.shape[2], width = x.shape[3]
    cdef Py_ssize_t n, c, ki, kj, i, j, row, col, hi, wj
    with nogil:
        for n in range(n_batch):
            for i in range(oh):
                for j in range(ow):
                    row = (n * oh + i) * ow + j
                    col = 0
                    for c in range(chans):
                        for ki in range(kh):
                            hi = i * stride + ki - pad
                            for kj in range(kw):
                                wj = j * stride + kj - pad
                                if 0 <= hi < height and 0 <= wj < width:
                                    cols[row, col] = x[n, c, hi, wj]
                                else:
                                    cols[row, col] = 0
                                col += 1


def im2col(x, int kh, int kw, int stride, int pad):
    x = np.ascontiguousarray(x)
    n, c, h, w = x.shape
    oh = (h + 2 * pad - kh) // stride + 1
    ow = (w + 2 * pad - kw) // stride + 1
    cols = np.empty((n * oh * ow, c * kh * kw), dtype=x.dtype)
    _im2col(x, cols, kh, kw, stride, pad, oh, ow)
    return cols


def _col2im(floating[:, ::1] cols, floating[:, :, :, ::1] out,
            int kh, int kw, int stride, int pad, int oh, int ow):
    cdef Py_ssize_t n_batch = out.shape[0], chans = out.shape[1]
    cdef Py_ssize_t height = out.shape[2], width = out.shape[3]
    cdef Py_ssize_t n, c, ki, kj, i, j, row, col, hi, wj
    with nogil:
        # loop order (c, ki, kj, i, j) matches the fallback's per-offset slice adds
        for n in range(n_batch):
            for c in range(chans):
                for ki in range(kh):
                    for kj in range(kw):
                        col = (c * kh + ki) * kw + kj
                        for i in range(oh):
                            hi = i * stride + ki - pad
                            if hi < 0 or hi >= height:
                                continue
                            for j in range(ow):
                                wj = j * stride + kj - pad
                                if wj < 0 or wj >= width:
                                    continue
                                row = (n * oh + i) * ow + j
                                out[n, c, hi, wj] = out[n, c, hi, wj] + cols[row, col]


def col2im(cols, shape, int kh, int kw, int stride, int pad):
    cols = np.ascontiguousarray(cols)
    n, c, h, w = shape
    oh = (h + 2 * pad - kh) // stride + 1
    ow = (w + 2 * pad - kw) // stride + 1
    out = np.zeros((n, c, h, w), dtype=cols.dtype)
    _col2im(cols, out, kh, kw, stride, pad, oh, ow)
    return out


def _lif_forward(floating[::1] prev, floating[::1] current, floating tau,
                 floating v_th, floating[::1] u, floating[::1] spikes,
                 floating[::1] post):
    cdef Py_ssize_t i, n = prev.shape[0]
    cdef floating decayed, charged
    with nogil:
        for i in range(n):
            decayed = tau * prev[i]
            charged = decayed + current[i]
            u[i] = charged
            if charged - v_th >= 0:
                spikes[i] = 1
                post[i] = 0
            else:
                spikes[i] = 0
                post[i] = charged


def lif_forward(prev, current, double tau, double v_th):
    prev = np.ascontiguousarray(prev)
    current = np.ascontiguousarray(current, dtype=prev.dtype)
    shape = prev.shape
    p = prev.reshape(-1)
    c = current.reshape(-1)
    u = np.empty_like(p)
    spikes = np.empty_like(p)
    post = np.empty_like(p)
    # fused dispatch picks float or double from the buffers; scalars are cast to match
    _lif_forward(p, c, tau, v_th, u, spikes, post)
    return spikes.reshape(shape), post.reshape(shape), u.reshape(shape)


def _lif_backward(floating[::1] u, floating[::1] spikes, floating[::1] g_spk,
                  floating[::1] g_post, floating tau, floating v_th,
                  floating width, floating slope,
                  floating[::1] g_prev, floating[::1] g_cur):
    cdef Py_ssize_t i, n = u.shape[0]
    cdef floating dist, sg, keep, through_post, du
    with nogil:
        for i in range(n):
            dist = u[i] - v_th
            if dist < 0:
                dist = -dist
            sg = slope if dist < width else 0
            keep = 1 - spikes[i]
            through_post = keep - u[i] * sg
            du = g_spk[i] * sg + g_post[i] * through_post
            g_cur[i] = du
            g_prev[i] = tau * du


def lif_backward(u, spikes, g_spikes, g_post, double tau, double v_th, double width):
    u = np.ascontiguousarray(u)
    dt = u.dtype
    shape = u.shape
    uf = u.reshape(-1)
    sf = np.ascontiguousarray(spikes, dtype=dt).reshape(-1)
    gs = np.ascontiguousarray(g_spikes, dtype=dt).reshape(-1)
    gp = np.ascontiguousarray(g_post, dtype=dt).reshape(-1)
    g_prev = np.empty_like(uf)
    g_cur = np.empty_like(uf)
    slope = 1.0 / (2.0 * width)
    _lif_backward(uf, sf, gs, gp, tau, v_th, width, slope, g_prev, g_cur)
    return g_prev.reshape(shape), g_cur.reshape(shape)
