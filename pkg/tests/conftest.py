import numpy as np
import pytest

from textclf import synth, text
from textclf.models import ModelConfig

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def numeric_grad(f, t, h, pattern=None):
    """Central differences of scalar ``f()`` w.r.t. every element of tensor ``t``.

    Uses the actually representable float32 perturbations as the divisor.  When
    ``pattern()`` is given it returns the piecewise-linear activation pattern
    (relu masks, max positions); coordinates whose perturbation changes it straddle
    a kink, where a secant says nothing about the derivative, and come back as NaN.
    """
    flat = t.data.reshape(-1)
    out = np.zeros(flat.size, dtype=np.float64)
    base = pattern() if pattern else None
    for i in range(flat.size):
        old = flat[i]
        flat[i] = old + np.float32(h)
        up, fp = float(flat[i]), f()
        kink = pattern is not None and not np.array_equal(pattern(), base)
        flat[i] = old - np.float32(h)
        down, fm = float(flat[i]), f()
        kink = kink or (pattern is not None and not np.array_equal(pattern(), base))
        flat[i] = old
        out[i] = np.nan if kink else (fp - fm) / (up - down)
    return out.reshape(t.shape)


def rel_error(analytic, numeric):
    """Norm-wise relative error ||a - n|| / max(||a||, ||n||), ignoring NaN (kink) entries."""
    a = np.asarray(analytic, dtype=np.float64)
    n = np.asarray(numeric, dtype=np.float64)
    keep = ~np.isnan(n)
    a, n = a[keep], n[keep]
    scale = max(np.linalg.norm(a), np.linalg.norm(n))
    if scale == 0.0:
        return 0.0
    return float(np.linalg.norm(a - n) / scale)


def tiny_config():
    return ModelConfig(vocab_size=20, num_class=3, pad_size=6, embed_size=4, n_filters=3,
                       kernel_sizes=(2, 3, 4), hidden_size=5, n_buckets=16)


def tiny_batch(seed=0, lengths=(6, 4)):
    rng = np.random.default_rng(seed)
    ids = np.zeros((len(lengths), 6), dtype=np.int64)
    for row, n in enumerate(lengths):
        ids[row, :n] = rng.integers(1, 20, n)
    data = text.EncodedDataset(ids, text.ngram_ids(ids, 2, 16), text.ngram_ids(ids, 3, 16),
                               rng.integers(0, 3, len(lengths)))
    return data.take(np.arange(len(lengths)))


@pytest.fixture(scope="session")
def synth_splits():
    return synth.generate(10, 1000, 2000, 42)


@pytest.fixture(scope="session")
def synth_encoded(synth_splits):
    vocab = text.build_vocab(t for t, _ in synth_splits["train"])
    enc = {k: text.encode_dataset(v, vocab, 32, 250_000) for k, v in synth_splits.items()}
    return vocab, enc
