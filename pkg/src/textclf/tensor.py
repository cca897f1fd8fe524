"""Dense float32 tensors with tape-based reverse-mode differentiation.

Operations record themselves onto the innermost active :class:`Tape` when
at least one input requires a gradient. Outside a tape nothing is
recorded, which is how evaluation runs::

    with Tape() as tape:
        loss = tc.sum(tc.matmul(x, w))
    backward(loss, tape)
"""
from __future__ import annotations

import numpy as np

from . import kernels
from .errors import ContractError, DimensionError, WindowError

_TAPES: list["Tape"] = []


class Tensor:
    """A float32 array plus an optional gradient buffer of the same shape.

    ``row_sparse`` marks embedding tables whose gradient touches only a few
    rows per step; the rows written since the last :meth:`zero_grad` are
    tracked so optimizers can skip the rest.
    """

    def __init__(self, data, trainable=False, name=None):
        self.data = np.ascontiguousarray(data, dtype=np.float32)
        self.grad = None
        self.trainable = trainable
        self.requires_grad = trainable
        self.name = name
        self.row_sparse = False
        self._touched = []

    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    def numpy(self):
        return self.data

    def item(self):
        return float(self.data.reshape(-1)[0])

    def __repr__(self):
        label = f" {self.name!r}" if self.name else ""
        return f"Tensor{label}(shape={self.shape}, trainable={self.trainable})"

    def zero_grad(self):
        if self.grad is None:
            return
        if self.row_sparse and self._touched:
            self.grad[self.touched_rows()] = 0.0
        else:
            self.grad.fill(0.0)
        self._touched = []

    def touched_rows(self):
        """Sorted unique rows written by backward since the last zero_grad."""
        if not self._touched:
            return np.zeros(0, dtype=np.int64)
        return np.unique(np.concatenate(self._touched))


class RowGrad:
    """Gradient contribution confined to some rows of a 2-d table."""

    def __init__(self, rows, scatter):
        self.rows = rows
        self.scatter = scatter

    def dense(self, shape):
        out = np.zeros(shape, dtype=np.float32)
        self.scatter(out)
        return out


class _Record:
    __slots__ = ("inputs", "output", "backward")

    def __init__(self, inputs, output, backward):
        self.inputs = inputs
        self.output = output
        self.backward = backward


class Tape:
    """Ordered log of the differentiable operations run inside its context."""

    def __init__(self):
        self.records: list[_Record] = []

    def __enter__(self):
        _TAPES.append(self)
        return self

    def __exit__(self, *exc):
        _TAPES.pop()
        return False

    def __len__(self):
        return len(self.records)

    def clear(self):
        self.records = []


def current_tape():
    return _TAPES[-1] if _TAPES else None


def as_tensor(x):
    return x if isinstance(x, Tensor) else Tensor(x)


def record(data, inputs, backward):
    """Wrap ``data`` in a Tensor and log the op if any input needs a gradient.

    ``backward`` maps the output gradient to one gradient per input (``None``
    for inputs that take none, or a :class:`RowGrad`).
    """
    out = Tensor(data)
    tape = current_tape()
    if tape is not None and any(t.requires_grad for t in inputs):
        out.requires_grad = True
        tape.records.append(_Record(tuple(inputs), out, backward))
    return out


def _accumulate_leaf(t, g):
    if t.grad is None:
        t.grad = np.zeros_like(t.data)
    if isinstance(g, RowGrad):
        g.scatter(t.grad)
        t._touched.append(np.asarray(g.rows, dtype=np.int64).reshape(-1))
    else:
        t.grad += g
        if t.row_sparse:
            t._touched.append(np.arange(t.shape[0], dtype=np.int64))


def backward(loss, tape):
    """Accumulate d(loss)/d(param) into ``.grad`` of every reachable trainable tensor."""
    if loss.data.size != 1:
        raise ContractError(f"backward needs a scalar loss, got shape {loss.shape}")
    seed = np.ones_like(loss.data)
    if loss.trainable:
        _accumulate_leaf(loss, seed)
    grads = {id(loss): seed}
    for rec in reversed(tape.records):
        g = grads.pop(id(rec.output), None)
        if g is None:
            continue
        for t, gi in zip(rec.inputs, rec.backward(g)):
            if gi is None or not t.requires_grad:
                continue
            if t.trainable:
                _accumulate_leaf(t, gi)
                continue
            if isinstance(gi, RowGrad):
                gi = gi.dense(t.shape)
            key = id(t)
            grads[key] = grads[key] + gi if key in grads else gi


# ---------------------------------------------------------------- elementwise


def _check_pair(a, b, op):
    if a.shape == b.shape:
        return
    if b.ndim < a.ndim and a.shape[a.ndim - b.ndim:] == b.shape:
        return
    raise DimensionError(f"{op}: incompatible shapes {a.shape} and {b.shape}")


def _reduce_to(g, shape):
    if g.shape == shape:
        return g
    lead = g.ndim - len(shape)
    return g.sum(axis=tuple(range(lead)))


def add(a, b):
    a, b = as_tensor(a), as_tensor(b)
    _check_pair(a, b, "add")
    return record(a.data + b.data, (a, b), lambda g: (g, _reduce_to(g, b.shape)))


def sub(a, b):
    a, b = as_tensor(a), as_tensor(b)
    _check_pair(a, b, "sub")
    return record(a.data - b.data, (a, b), lambda g: (g, -_reduce_to(g, b.shape)))


def mul(a, b):
    a, b = as_tensor(a), as_tensor(b)
    _check_pair(a, b, "mul")
    return record(a.data * b.data, (a, b),
                  lambda g: (g * b.data, _reduce_to(g * a.data, b.shape)))


def elementwise(op, a, b):
    try:
        fn = {"add": add, "mul": mul, "sub": sub}[op]
    except KeyError:
        raise ValueError(f"unknown elementwise op {op!r}") from None
    return fn(a, b)


def relu(a):
    mask = a.data > 0
    return record(np.where(mask, a.data, 0.0).astype(np.float32), (a,), lambda g: (g * mask,))


def sigmoid(a):
    y = kernels.sigmoid(a.data)
    return record(y, (a,), lambda g: (g * y * (1.0 - y),))


def tanh(a):
    y = np.tanh(a.data)
    return record(y, (a,), lambda g: (g * (1.0 - y * y),))


def activation(op, a):
    try:
        fn = {"relu": relu, "sigmoid": sigmoid, "tanh": tanh}[op]
    except KeyError:
        raise ValueError(f"unknown activation {op!r}") from None
    return fn(a)


def softmax_array(x):
    z = x - x.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return (e / e.sum(axis=-1, keepdims=True)).astype(np.float32, copy=False)


def softmax(a):
    """Softmax over the last axis, shifted by the row max so it never overflows."""
    y = softmax_array(a.data)

    def back(g):
        return (y * (g - (g * y).sum(axis=-1, keepdims=True)),)

    return record(y, (a,), back)


# ----------------------------------------------------------------- structure


def matmul(a, b):
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise DimensionError(f"matmul: cannot multiply {a.shape} by {b.shape}")
    return record(a.data @ b.data, (a, b), lambda g: (g @ b.data.T, a.data.T @ g))


def sum(a):  # noqa: A001 - mirrors numpy naming
    return record(np.float32(a.data.sum()).reshape(()), (a,),
                  lambda g: (np.full(a.shape, g, dtype=np.float32),))


def mean(a):
    n = a.data.size
    return record(np.float32(a.data.mean()).reshape(()), (a,),
                  lambda g: (np.full(a.shape, g / n, dtype=np.float32),))


def reshape(a, shape):
    return record(a.data.reshape(shape), (a,), lambda g: (g.reshape(a.shape),))


def concat(tensors, axis=-1):
    tensors = list(tensors)
    data = np.concatenate([t.data for t in tensors], axis=axis)
    ax = axis % data.ndim
    bounds = np.cumsum([0] + [t.shape[ax] for t in tensors])

    def back(g):
        return tuple(np.take(g, np.arange(bounds[i], bounds[i + 1]), axis=ax)
                     for i in range(len(tensors)))

    return record(data, tensors, back)


def time_step(a, t):
    """Select ``a[:, t, :]`` from a ``[batch, time, features]`` tensor."""
    if a.ndim != 3:
        raise DimensionError(f"time_step expects [batch, time, features], got {a.shape}")

    def back(g):
        out = np.zeros(a.shape, dtype=np.float32)
        out[:, t, :] = g
        return (out,)

    return record(np.ascontiguousarray(a.data[:, t, :]), (a,), back)


def mean_over_time(a):
    if a.ndim != 3:
        raise DimensionError(f"mean_over_time expects [batch, time, features], got {a.shape}")
    T = a.shape[1]

    def back(g):
        return (np.repeat(g[:, None, :] / np.float32(T), T, axis=1),)

    return record(a.data.mean(axis=1), (a,), back)


# ------------------------------------------------------------ sequence layers


def embedding(table, ids):
    """Row lookup ``table[ids]``; the gradient is scattered back into table rows."""
    ids = np.asarray(ids, dtype=np.int64)
    V, E = table.shape
    if ids.size and (ids.min() < 0 or ids.max() >= V):
        raise IndexError(f"embedding id out of range [0, {V})")
    flat = ids.reshape(-1)

    def back(g):
        vals = np.ascontiguousarray(g.reshape(-1, E))
        return (RowGrad(flat, lambda dst: kernels.scatter_add_rows(dst, flat, vals)),)

    return record(table.data[ids], (table,), back)


def embedding_bag(table, ids, weights):
    """Weighted bag of rows: ``out[b] = sum_t weights[b, t] * table[ids[b, t]]``."""
    ids = np.ascontiguousarray(ids, dtype=np.int64)
    weights = np.ascontiguousarray(weights, dtype=np.float32)
    V = table.shape[0]
    if ids.shape != weights.shape or ids.ndim != 2:
        raise DimensionError(f"embedding_bag: ids {ids.shape} vs weights {weights.shape}")
    if ids.size and (ids.min() < 0 or ids.max() >= V):
        raise IndexError(f"embedding id out of range [0, {V})")
    rows = ids[weights != 0]

    def back(g):
        g = np.ascontiguousarray(g)
        return (RowGrad(rows, lambda dst: kernels.bag_backward(g, ids, weights, dst)),)

    return record(kernels.bag_forward(table.data, ids, weights), (table,), back)


def conv1d_over_time(x, kernels_, bias):
    """Valid 1-d convolution along time.

    ``x`` is ``[seq, embed]`` or ``[batch, seq, embed]``; ``kernels_`` is
    ``[k, embed, out_ch]``. Output is ``[(batch,) seq - k + 1, out_ch]``.
    """
    if kernels_.ndim != 3 or bias.shape != (kernels_.shape[2],):
        raise DimensionError(f"conv1d: bad kernel {kernels_.shape} / bias {bias.shape}")
    if x.ndim not in (2, 3) or x.shape[-1] != kernels_.shape[1]:
        raise DimensionError(f"conv1d: input {x.shape} does not match kernel {kernels_.shape}")
    k = kernels_.shape[0]
    if k > x.shape[-2]:
        raise WindowError(f"conv1d: kernel size {k} exceeds sequence length {x.shape[-2]}")
    squeeze = x.ndim == 2
    xd = x.data[None] if squeeze else x.data
    out = kernels.conv1d_forward(xd, kernels_.data, bias.data)

    def back(g):
        g3 = np.ascontiguousarray(g[None] if squeeze else g)
        dx, dw, db = kernels.conv1d_backward(xd, kernels_.data, g3)
        return (dx[0] if squeeze else dx, dw, db)

    return record(out[0] if squeeze else out, (x, kernels_, bias), back)


def max_over_time(x):
    """1-max pooling: ``[(batch,) time, ch] -> [(batch,) ch]``; ties go to the earliest step."""
    if x.ndim not in (2, 3) or x.shape[-2] == 0:
        raise DimensionError(f"max_over_time: need a non-empty time axis, got {x.shape}")
    squeeze = x.ndim == 2
    xd = x.data[None] if squeeze else x.data
    T = xd.shape[1]
    out, idx = kernels.max_time_forward(xd)

    def back(g):
        g2 = np.ascontiguousarray(g[None] if squeeze else g)
        dx = kernels.max_time_backward(g2, idx, T)
        return (dx[0] if squeeze else dx,)

    return record(out[0] if squeeze else out, (x,), back)


def lstm(x, w_ih, w_hh, bias, reverse=False):
    """One LSTM direction over ``[batch, time, in]`` giving ``[batch, time, hidden]``.

    Gate blocks in the ``4 * hidden`` axis are ordered input, forget, cell,
    output. With ``reverse`` the sequence is consumed back to front and each
    output lands at its original time index.
    """
    B, T, E = x.shape
    H = w_hh.shape[0]
    if w_ih.shape != (E, 4 * H) or w_hh.shape != (H, 4 * H) or bias.shape != (4 * H,):
        raise DimensionError(
            f"lstm: input {x.shape}, w_ih {w_ih.shape}, w_hh {w_hh.shape}, bias {bias.shape}")
    xw = (x.data.reshape(B * T, E) @ w_ih.data + bias.data).reshape(B, T, 4 * H)
    xw = np.ascontiguousarray(xw.transpose(1, 0, 2))
    hs, cs, gates = kernels.lstm_forward(xw, w_hh.data, reverse)

    def back(g):
        dhs = np.ascontiguousarray(g.transpose(1, 0, 2))
        dz, dw_hh = kernels.lstm_backward(dhs, hs, cs, gates, w_hh.data, reverse)
        dz = dz.transpose(1, 0, 2).reshape(B * T, 4 * H)
        dx = (dz @ w_ih.data.T).reshape(B, T, E)
        dw_ih = x.data.reshape(B * T, E).T @ dz
        return (dx, dw_ih, dw_hh, dz.sum(axis=0))

    return record(np.ascontiguousarray(hs.transpose(1, 0, 2)), (x, w_ih, w_hh, bias), back)
