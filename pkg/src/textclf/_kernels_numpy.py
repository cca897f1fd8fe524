"""Pure-numpy reference kernels.

Every function here has a twin in ``_kernels_numba`` with the same signature.
Arrays are float32 and C-contiguous unless noted; sequence kernels use
batch-major ``[B, T, ...]`` except the LSTM kernels, which are time-major.
"""
import numpy as np

FNV_OFFSET = np.uint64(14695981039346656037)
FNV_PRIME = np.uint64(1099511628211)


def sigmoid(x):
    # tanh form never overflows in float32
    return (0.5 * (1.0 + np.tanh(0.5 * x))).astype(np.float32, copy=False)


def _im2col(x, k):
    B, T, E = x.shape
    L = T - k + 1
    cols = np.empty((B, L, k, E), dtype=np.float32)
    for i in range(k):
        cols[:, :, i, :] = x[:, i:i + L, :]
    return cols.reshape(B * L, k * E)


def conv1d_forward(x, w, b):
    B, T, E = x.shape
    k, _, C = w.shape
    L = T - k + 1
    out = _im2col(x, k) @ w.reshape(k * E, C)
    out += b
    return out.reshape(B, L, C)


def conv1d_backward(x, w, gout):
    B, T, E = x.shape
    k, _, C = w.shape
    L = T - k + 1
    g = gout.reshape(B * L, C)
    dw = (_im2col(x, k).T @ g).reshape(k, E, C)
    db = g.sum(axis=0)
    dcols = (g @ w.reshape(k * E, C).T).reshape(B, L, k, E)
    dx = np.zeros_like(x)
    for i in range(k):
        dx[:, i:i + L, :] += dcols[:, :, i, :]
    return dx, dw, db


def max_time_forward(x):
    # np.argmax returns the first maximal index, so ties go to the earliest step
    idx = np.argmax(x, axis=1)
    out = np.take_along_axis(x, idx[:, None, :], axis=1)[:, 0, :]
    return np.ascontiguousarray(out), idx.astype(np.int64)


def max_time_backward(gout, idx, T):
    B, C = gout.shape
    dx = np.zeros((B, T, C), dtype=np.float32)
    np.put_along_axis(dx, idx[:, None, :], gout[:, None, :], axis=1)
    return dx


def scatter_add_rows(dst, ids, values):
    np.add.at(dst, ids, values)


def bag_forward(table, ids, weights):
    return np.einsum("bte,bt->be", table[ids], weights).astype(np.float32, copy=False)


def bag_backward(gout, ids, weights, dst):
    E = gout.shape[1]
    vals = weights[:, :, None] * gout[:, None, :]
    np.add.at(dst, ids.ravel(), vals.reshape(-1, E))


def lstm_forward(xw, w_hh, reverse):
    """Run one LSTM direction over time-major pre-activations.

    ``xw`` is ``[T, B, 4H]`` holding ``x_t @ W_ih + bias``. Returns hidden
    states, cell states and activated gates, all time-major.
    """
    T, B, G = xw.shape
    H = G // 4
    hs = np.empty((T, B, H), dtype=np.float32)
    cs = np.empty((T, B, H), dtype=np.float32)
    gates = np.empty((T, B, G), dtype=np.float32)
    h = np.zeros((B, H), dtype=np.float32)
    c = np.zeros((B, H), dtype=np.float32)
    steps = range(T - 1, -1, -1) if reverse else range(T)
    for t in steps:
        z = xw[t] + h @ w_hh
        i = sigmoid(z[:, :H])
        f = sigmoid(z[:, H:2 * H])
        g = np.tanh(z[:, 2 * H:3 * H])
        o = sigmoid(z[:, 3 * H:])
        c = f * c + i * g
        h = o * np.tanh(c)
        gates[t, :, :H] = i
        gates[t, :, H:2 * H] = f
        gates[t, :, 2 * H:3 * H] = g
        gates[t, :, 3 * H:] = o
        hs[t] = h
        cs[t] = c
    return hs, cs, gates


def lstm_backward(dhs, hs, cs, gates, w_hh, reverse):
    T, B, H = hs.shape
    dz = np.empty((T, B, 4 * H), dtype=np.float32)
    dw_hh = np.zeros_like(w_hh)
    dh_next = np.zeros((B, H), dtype=np.float32)
    dc_next = np.zeros((B, H), dtype=np.float32)
    zeros = np.zeros((B, H), dtype=np.float32)
    steps = range(T) if reverse else range(T - 1, -1, -1)
    for t in steps:
        prev = t + 1 if reverse else t - 1
        h_prev = hs[prev] if 0 <= prev < T else zeros
        c_prev = cs[prev] if 0 <= prev < T else zeros
        i = gates[t, :, :H]
        f = gates[t, :, H:2 * H]
        g = gates[t, :, 2 * H:3 * H]
        o = gates[t, :, 3 * H:]
        tc = np.tanh(cs[t])
        dh = dhs[t] + dh_next
        dc = dh * o * (1.0 - tc * tc) + dc_next
        dz[t, :, :H] = dc * g * i * (1.0 - i)
        dz[t, :, H:2 * H] = dc * c_prev * f * (1.0 - f)
        dz[t, :, 2 * H:3 * H] = dc * i * (1.0 - g * g)
        dz[t, :, 3 * H:] = dh * tc * o * (1.0 - o)
        dc_next = dc * f
        dw_hh += h_prev.T @ dz[t]
        dh_next = dz[t] @ w_hh.T
    return dz, dw_hh


def adam_update(p, g, m, v, rows, lr, beta1, beta2, eps, step):
    """In-place bias-corrected Adam step; ``rows`` restricts it to table rows."""
    c1 = np.float32(1.0 - beta1 ** step)
    c2 = np.float32(1.0 - beta2 ** step)
    b1, b2 = np.float32(beta1), np.float32(beta2)
    lr, eps = np.float32(lr), np.float32(eps)
    if rows is None:
        m *= b1
        m += (1 - b1) * g
        v *= b2
        v += (1 - b2) * g * g
        p -= lr * (m / c1) / (np.sqrt(v / c2) + eps)
        return
    gr = g[rows]
    mr = b1 * m[rows] + (1 - b1) * gr
    vr = b2 * v[rows] + (1 - b2) * gr * gr
    m[rows] = mr
    v[rows] = vr
    p[rows] -= lr * (mr / c1) / (np.sqrt(vr / c2) + eps)


def fnv1a_ngrams(ids, n, n_buckets):
    """Hash each length-``n`` window ending at position i into a bucket.

    Ids are hashed as 4-byte little-endian unsigned integers with 64-bit
    FNV-1a. Windows that start before position 0 or contain PAD (id 0)
    map to bucket 0.
    """
    ids = np.asarray(ids, dtype=np.int64)
    N, P = ids.shape
    out = np.zeros((N, P), dtype=np.int64)
    if P < n:
        return out
    L = P - n + 1
    h = np.full((N, L), FNV_OFFSET, dtype=np.uint64)
    valid = np.ones((N, L), dtype=bool)
    for j in range(n):
        window = ids[:, j:j + L]
        valid &= window != 0
        u = window.astype(np.uint64)
        for shift in (0, 8, 16, 24):
            h ^= (u >> np.uint64(shift)) & np.uint64(0xFF)
            h *= FNV_PRIME
    out[:, n - 1:] = np.where(valid, h % np.uint64(n_buckets), 0).astype(np.int64)
    return out
