"""TextCNN, TextRNN (Bi-LSTM) and FastText classifiers.

All three share one contract: ``model.forward(batch)`` returns unnormalized
logits of shape ``[batch_size, num_class]``. Softmax lives in the loss and
metrics code.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, fields

import numpy as np

from . import tensor as tc
from .errors import ConfigError
from .tensor import Tensor
from .text import PAD_ID, Batch

ARCHITECTURES = ("textcnn", "textrnn", "fasttext")
RNN_POOLING = ("last", "mean", "max")


@dataclass
class ModelConfig:
    vocab_size: int
    num_class: int = 10
    pad_size: int = 32
    embed_size: int = 128
    n_filters: int = 100
    kernel_sizes: tuple = (2, 3, 4)
    hidden_size: int = 128
    n_buckets: int = 250_000
    rnn_pooling: str = "last"

    def __post_init__(self):
        self.kernel_sizes = tuple(int(k) for k in self.kernel_sizes)
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, int) and value < 1:
                raise ConfigError(f"{f.name} must be positive, got {value}")
        ks = self.kernel_sizes
        if not ks or any(k < 1 for k in ks) or any(a >= b for a, b in zip(ks, ks[1:])):
            raise ConfigError(f"kernel_sizes must be strictly increasing positive ints, got {ks}")
        if self.rnn_pooling not in RNN_POOLING:
            raise ConfigError(f"rnn_pooling must be one of {RNN_POOLING}")

    def to_dict(self):
        d = asdict(self)
        d["kernel_sizes"] = list(self.kernel_sizes)
        return d

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


def xavier_uniform(rng, shape, fan_in, fan_out):
    bound = np.sqrt(6.0 / (fan_in + fan_out))
    return (rng.random(shape, dtype=np.float32) * 2 - 1) * np.float32(bound)


def uniform_embedding(rng, shape, scale=0.1):
    return (rng.random(shape, dtype=np.float32) * 2 - 1) * np.float32(scale)


class Classifier:
    """Named parameter set plus a forward pass."""

    name = ""
    # global-norm gradient clip the trainer applies unless overridden
    clip_norm = None

    def __init__(self, config: ModelConfig):
        self.config = config
        self.params: dict[str, Tensor] = {}

    def _add(self, name, data, row_sparse=False):
        t = Tensor(data, trainable=True, name=name)
        t.row_sparse = row_sparse
        self.params[name] = t
        return t

    def parameters(self):
        return list(self.params.values())

    def zero_grad(self):
        for p in self.params.values():
            p.zero_grad()

    def state_dict(self):
        return {name: p.data.copy() for name, p in self.params.items()}

    def load_state_dict(self, state):
        if list(state) != list(self.params):
            raise KeyError(f"parameter names differ: {list(state)} vs {list(self.params)}")
        for name, arr in state.items():
            p = self.params[name]
            if arr.shape != p.shape:
                raise ValueError(f"{name}: shape {arr.shape} != {p.shape}")
            p.data[...] = arr

    def _check_ids(self, batch: Batch):
        ids = batch.char_ids
        if ids.size and (ids.min() < 0 or ids.max() >= self.config.vocab_size):
            raise IndexError(f"char id out of vocab range [0, {self.config.vocab_size})")

    def _head(self, features):
        return tc.add(tc.matmul(features, self.params["out.weight"]), self.params["out.bias"])

    def forward(self, batch: Batch) -> Tensor:
        raise NotImplementedError

    __call__ = forward


class TextCNN(Classifier):
    name = "textcnn"

    def __init__(self, config, rng):
        super().__init__(config)
        if max(config.kernel_sizes) > config.pad_size:
            raise ConfigError("max kernel size exceeds pad_size")
        V, E, F, C = config.vocab_size, config.embed_size, config.n_filters, config.num_class
        self._add("embedding", uniform_embedding(rng, (V, E)))
        for k in config.kernel_sizes:
            self._add(f"conv{k}.weight", xavier_uniform(rng, (k, E, F), k * E, k * F))
            self._add(f"conv{k}.bias", np.zeros(F, dtype=np.float32))
        feat = F * len(config.kernel_sizes)
        self._add("out.weight", xavier_uniform(rng, (feat, C), feat, C))
        self._add("out.bias", np.zeros(C, dtype=np.float32))

    def features(self, batch):
        self._check_ids(batch)
        emb = tc.embedding(self.params["embedding"], batch.char_ids)
        pooled = []
        for k in self.config.kernel_sizes:
            conv = tc.conv1d_over_time(emb, self.params[f"conv{k}.weight"],
                                       self.params[f"conv{k}.bias"])
            pooled.append(tc.max_over_time(tc.relu(conv)))
        return tc.concat(pooled, axis=-1)

    def forward(self, batch):
        return self._head(self.features(batch))


def bilstm_forward(params, embedded: Tensor) -> Tensor:
    """Forward and backward LSTM outputs concatenated per time step."""
    fwd = tc.lstm(embedded, params["lstm_fwd.w_ih"], params["lstm_fwd.w_hh"],
                  params["lstm_fwd.bias"])
    bwd = tc.lstm(embedded, params["lstm_bwd.w_ih"], params["lstm_bwd.w_hh"],
                  params["lstm_bwd.bias"], reverse=True)
    return tc.concat([fwd, bwd], axis=-1)


class TextRNN(Classifier):
    name = "textrnn"
    clip_norm = 5.0

    def __init__(self, config, rng):
        super().__init__(config)
        V, E, H, C = config.vocab_size, config.embed_size, config.hidden_size, config.num_class
        self._add("embedding", uniform_embedding(rng, (V, E)))
        for d in ("fwd", "bwd"):
            self._add(f"lstm_{d}.w_ih", xavier_uniform(rng, (E, 4 * H), E, 4 * H))
            self._add(f"lstm_{d}.w_hh", xavier_uniform(rng, (H, 4 * H), H, 4 * H))
            bias = np.zeros(4 * H, dtype=np.float32)
            bias[H:2 * H] = 1.0
            self._add(f"lstm_{d}.bias", bias)
        self._add("out.weight", xavier_uniform(rng, (2 * H, C), 2 * H, C))
        self._add("out.bias", np.zeros(C, dtype=np.float32))

    def features(self, batch):
        self._check_ids(batch)
        emb = tc.embedding(self.params["embedding"], batch.char_ids)
        states = bilstm_forward(self.params, emb)
        pooling = self.config.rnn_pooling
        if pooling == "last":
            return tc.time_step(states, states.shape[1] - 1)
        if pooling == "mean":
            return tc.mean_over_time(states)
        return tc.max_over_time(states)

    def forward(self, batch):
        return self._head(self.features(batch))


def ngram_mask(char_ids, n):
    """True where the length-n window ending at each position is PAD-free."""
    ok = char_ids != PAD_ID
    mask = np.zeros_like(ok)
    if char_ids.shape[1] >= n:
        window = ok[:, n - 1:].copy()
        for j in range(1, n):
            window &= ok[:, n - 1 - j:char_ids.shape[1] - j]
        mask[:, n - 1:] = window
    return mask


def bag_weights(char_ids):
    """Averaging weights for the char, bigram and trigram bags of each row."""
    masks = [char_ids != PAD_ID, ngram_mask(char_ids, 2), ngram_mask(char_ids, 3)]
    count = sum(m.sum(axis=1) for m in masks).astype(np.float32)
    inv = np.divide(1.0, count, out=np.zeros_like(count), where=count > 0)
    return [m.astype(np.float32) * inv[:, None] for m in masks]


class FastText(Classifier):
    name = "fasttext"

    def __init__(self, config, rng):
        super().__init__(config)
        V, E, N, C = config.vocab_size, config.embed_size, config.n_buckets, config.num_class
        self._add("embedding", uniform_embedding(rng, (V, E)))
        self._add("bigram_embedding", uniform_embedding(rng, (N, E)), row_sparse=True)
        self._add("trigram_embedding", uniform_embedding(rng, (N, E)), row_sparse=True)
        self._add("out.weight", xavier_uniform(rng, (E, C), E, C))
        self._add("out.bias", np.zeros(C, dtype=np.float32))

    def features(self, batch):
        self._check_ids(batch)
        w_char, w_bi, w_tri = bag_weights(batch.char_ids)
        doc = tc.embedding_bag(self.params["embedding"], batch.char_ids, w_char)
        doc = tc.add(doc, tc.embedding_bag(self.params["bigram_embedding"], batch.bigram_ids, w_bi))
        doc = tc.add(doc, tc.embedding_bag(self.params["trigram_embedding"], batch.trigram_ids,
                                           w_tri))
        return doc

    def forward(self, batch):
        return self._head(self.features(batch))


_CLASSES = {"textcnn": TextCNN, "textrnn": TextRNN, "fasttext": FastText}


def init_params(arch: str, config: ModelConfig, seed: int = 0) -> Classifier:
    """Build ``arch`` with freshly initialized parameters fully determined by ``seed``."""
    try:
        cls = _CLASSES[arch]
    except KeyError:
        raise ConfigError(f"unknown model {arch!r}; choose from {', '.join(ARCHITECTURES)}") from None
    return cls(config, np.random.default_rng(seed))
