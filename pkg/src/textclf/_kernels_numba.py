"""numba-compiled twins of the kernels in ``_kernels_numpy``.

The sigmoid and LSTM kernels are shared with the numpy backend.  Their cost is
dominated by tanh over whole gate blocks.  numpy evaluates that with SIMD loops,
while compiled scalar code calls libm once per element and runs about 3x slower
end to end (see ``benchmarks/bench_kernels.py``).
"""
import numpy as np
from numba import njit

from ._kernels_numpy import lstm_backward, lstm_forward, sigmoid

__all__ = [
    "sigmoid", "conv1d_forward", "conv1d_backward", "max_time_forward", "max_time_backward",
    "scatter_add_rows", "bag_forward", "bag_backward", "lstm_forward", "lstm_backward",
    "adam_update", "fnv1a_ngrams",
]

FNV_OFFSET = np.uint64(14695981039346656037)
FNV_PRIME = np.uint64(1099511628211)


@njit(cache=True)
def _im2col(x, k):
    B, T, E = x.shape
    L = T - k + 1
    cols = np.empty((B * L, k * E), dtype=np.float32)
    for b in range(B):
        for t in range(L):
            r = b * L + t
            for i in range(k):
                for e in range(E):
                    cols[r, i * E + e] = x[b, t + i, e]
    return cols


@njit(cache=True)
def conv1d_forward(x, w, b):
    B, T, E = x.shape
    k, _, C = w.shape
    L = T - k + 1
    out = np.dot(_im2col(x, k), np.ascontiguousarray(w).reshape(k * E, C))
    for r in range(B * L):
        for c in range(C):
            out[r, c] += b[c]
    return out.reshape(B, L, C)


@njit(cache=True)
def conv1d_backward(x, w, gout):
    B, T, E = x.shape
    k, _, C = w.shape
    L = T - k + 1
    g = np.ascontiguousarray(gout).reshape(B * L, C)
    cols = _im2col(x, k)
    dw = np.dot(cols.T.copy(), g).reshape(k, E, C)
    db = np.zeros(C, dtype=np.float32)
    for r in range(B * L):
        for c in range(C):
            db[c] += g[r, c]
    wf = np.ascontiguousarray(w).reshape(k * E, C)
    dcols = np.dot(g, wf.T.copy())
    dx = np.zeros_like(x)
    for b in range(B):
        for t in range(L):
            r = b * L + t
            for i in range(k):
                for e in range(E):
                    dx[b, t + i, e] += dcols[r, i * E + e]
    return dx, dw, db


@njit(cache=True)
def max_time_forward(x):
    B, T, C = x.shape
    out = np.empty((B, C), dtype=np.float32)
    idx = np.zeros((B, C), dtype=np.int64)
    for b in range(B):
        for c in range(C):
            best = x[b, 0, c]
            arg = 0
            for t in range(1, T):
                if x[b, t, c] > best:
                    best = x[b, t, c]
                    arg = t
            out[b, c] = best
            idx[b, c] = arg
    return out, idx


@njit(cache=True)
def max_time_backward(gout, idx, T):
    B, C = gout.shape
    dx = np.zeros((B, T, C), dtype=np.float32)
    for b in range(B):
        for c in range(C):
            dx[b, idx[b, c], c] = gout[b, c]
    return dx


@njit(cache=True)
def scatter_add_rows(dst, ids, values):
    E = dst.shape[1]
    for r in range(ids.shape[0]):
        row = ids[r]
        for e in range(E):
            dst[row, e] += values[r, e]


@njit(cache=True)
def bag_forward(table, ids, weights):
    B, T = ids.shape
    E = table.shape[1]
    out = np.zeros((B, E), dtype=np.float32)
    for b in range(B):
        for t in range(T):
            wt = weights[b, t]
            if wt == 0.0:
                continue
            row = ids[b, t]
            for e in range(E):
                out[b, e] += wt * table[row, e]
    return out


@njit(cache=True)
def bag_backward(gout, ids, weights, dst):
    B, T = ids.shape
    E = gout.shape[1]
    for b in range(B):
        for t in range(T):
            wt = weights[b, t]
            if wt == 0.0:
                continue
            row = ids[b, t]
            for e in range(E):
                dst[row, e] += wt * gout[b, e]


@njit(cache=True)
def _adam_row(p, g, m, v, lr, b1, b2, eps, c1, c2):
    for j in range(p.shape[0]):
        gj = g[j]
        mj = b1 * m[j] + (np.float32(1.0) - b1) * gj
        vj = b2 * v[j] + (np.float32(1.0) - b2) * gj * gj
        m[j] = mj
        v[j] = vj
        p[j] -= lr * (mj / c1) / (np.sqrt(vj / c2) + eps)


@njit(cache=True)
def _adam_dense(p, g, m, v, lr, b1, b2, eps, c1, c2):
    _adam_row(p.reshape(-1), g.reshape(-1), m.reshape(-1), v.reshape(-1), lr, b1, b2, eps, c1, c2)


@njit(cache=True)
def _adam_rows(p, g, m, v, rows, lr, b1, b2, eps, c1, c2):
    for r in rows:
        _adam_row(p[r], g[r], m[r], v[r], lr, b1, b2, eps, c1, c2)


def adam_update(p, g, m, v, rows, lr, beta1, beta2, eps, step):
    args = (np.float32(lr), np.float32(beta1), np.float32(beta2), np.float32(eps),
            np.float32(1.0 - beta1 ** step), np.float32(1.0 - beta2 ** step))
    if rows is None:
        _adam_dense(p, g, m, v, *args)
    else:
        _adam_rows(p, g, m, v, np.asarray(rows, dtype=np.int64), *args)


@njit(cache=True)
def _fnv_kernel(ids, n, n_buckets):
    N, P = ids.shape
    out = np.zeros((N, P), dtype=np.int64)
    mask = np.uint64(0xFF)
    for r in range(N):
        for i in range(n - 1, P):
            h = FNV_OFFSET
            ok = True
            for j in range(i - n + 1, i + 1):
                tok = ids[r, j]
                if tok == 0:
                    ok = False
                    break
                u = np.uint64(tok)
                for shift in range(0, 32, 8):
                    h = h ^ ((u >> np.uint64(shift)) & mask)
                    h = h * FNV_PRIME
            if ok:
                out[r, i] = np.int64(h % np.uint64(n_buckets))
    return out


def fnv1a_ngrams(ids, n, n_buckets):
    return _fnv_kernel(np.ascontiguousarray(ids, dtype=np.int64), int(n), int(n_buckets))
