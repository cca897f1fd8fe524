"""numpy and numba kernel backends must agree."""
import numpy as np
import pytest

from textclf import kernels

pytestmark = pytest.mark.skipif(not kernels.numba_available(), reason="numba not installed")

NP = kernels.get_backend("numpy")


@pytest.fixture(scope="module")
def NB():
    return kernels.get_backend("numba")


def f32(rng, *shape):
    return rng.standard_normal(shape).astype(np.float32)


def test_backend_names():
    assert kernels.BACKEND in ("numpy", "numba")
    with pytest.raises(ValueError):
        kernels.get_backend("cuda")


def test_conv1d(NB):
    rng = np.random.default_rng(0)
    x, w, b, g = f32(rng, 3, 9, 5), f32(rng, 4, 5, 6), f32(rng, 6), f32(rng, 3, 6, 6)
    np.testing.assert_allclose(NP.conv1d_forward(x, w, b), NB.conv1d_forward(x, w, b), atol=1e-5)
    for a, c in zip(NP.conv1d_backward(x, w, g), NB.conv1d_backward(x, w, g)):
        np.testing.assert_allclose(a, c, atol=1e-5)


def test_max_time(NB):
    rng = np.random.default_rng(1)
    x = np.round(f32(rng, 2, 7, 3))  # rounding creates ties
    out_a, idx_a = NP.max_time_forward(x)
    out_b, idx_b = NB.max_time_forward(x)
    assert np.array_equal(out_a, out_b) and np.array_equal(idx_a, idx_b)
    g = f32(rng, 2, 3)
    assert np.array_equal(NP.max_time_backward(g, idx_a, 7), NB.max_time_backward(g, idx_b, 7))


def test_scatter_and_bag(NB):
    rng = np.random.default_rng(2)
    table = f32(rng, 10, 4)
    ids = rng.integers(0, 10, (3, 6))
    weights = rng.random((3, 6)).astype(np.float32)
    weights[0, 2:] = 0
    np.testing.assert_allclose(NP.bag_forward(table, ids, weights),
                               NB.bag_forward(table, ids, weights), atol=1e-6)
    g = f32(rng, 3, 4)
    da, db = np.zeros_like(table), np.zeros_like(table)
    NP.bag_backward(g, ids, weights, da)
    NB.bag_backward(g, ids, weights, db)
    np.testing.assert_allclose(da, db, atol=1e-6)
    vals = f32(rng, 18, 4)
    da[:], db[:] = 0, 0
    NP.scatter_add_rows(da, ids.ravel(), vals)
    NB.scatter_add_rows(db, ids.ravel(), vals)
    np.testing.assert_allclose(da, db, atol=1e-6)


def test_transcendental_kernels_are_shared(NB):
    # tanh-bound kernels stay on numpy's SIMD loops under both backends
    for name in ("sigmoid", "lstm_forward", "lstm_backward"):
        assert getattr(NB, name) is getattr(NP, name)


@pytest.mark.parametrize("rows", [None, np.array([1, 4])])
def test_adam(NB, rows):
    rng = np.random.default_rng(4)
    p, g = f32(rng, 6, 3), f32(rng, 6, 3)
    states = []
    for backend in (NP, NB):
        pp, m, v = p.copy(), np.zeros_like(p), np.zeros_like(p)
        for step in (1, 2, 3):
            backend.adam_update(pp, g, m, v, rows, 1e-2, 0.9, 0.999, 1e-8, step)
        states.append((pp, m, v))
    for a, b in zip(*states):
        np.testing.assert_allclose(a, b, rtol=1e-6, atol=1e-7)
    if rows is not None:
        untouched = np.setdiff1d(np.arange(6), rows)
        assert np.array_equal(states[0][0][untouched], p[untouched])


def test_fnv(NB):
    ids = np.random.default_rng(5).integers(0, 300, (6, 11))
    ids[2, 5:] = 0
    for n in (2, 3):
        assert np.array_equal(NP.fnv1a_ngrams(ids, n, 997), NB.fnv1a_ngrams(ids, n, 997))


def test_backends_export_every_kernel(NB):
    for name in kernels.KERNEL_NAMES:
        assert callable(getattr(NP, name)) and callable(getattr(NB, name))
