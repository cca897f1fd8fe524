"""Tokenization, vocabulary, encoding, n-gram hashing and batching."""
from __future__ import annotations

import hashlib
from collections import Counter
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np

from . import kernels
from .errors import InputEncodingError, LabelError, ParseError

PAD, UNK = "<PAD>", "<UNK>"
PAD_ID, UNK_ID = 0, 1


def _decode(text, what="input"):
    if isinstance(text, (bytes, bytearray)):
        try:
            return bytes(text).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise InputEncodingError(
                f"invalid UTF-8 in {what} at byte offset {exc.start}", offset=exc.start) from None
    return text


def tokenize(text: str | bytes) -> list[str]:
    """One token per Unicode code point; whitespace is dropped."""
    return [ch for ch in _decode(text) if not ch.isspace()]


def tokenize_words(text: str | bytes) -> list[str]:
    """Tokenizer for pre-segmented input: whitespace separates tokens."""
    return _decode(text).split()


TOKENIZERS = {"char": tokenize, "word": tokenize_words}


def get_tokenizer(name):
    try:
        return TOKENIZERS[name]
    except KeyError:
        raise ValueError(f"unknown tokenizer {name!r}; choose from {sorted(TOKENIZERS)}") from None


class Vocab:
    """Token/id mapping with PAD at 0 and UNK at 1."""

    def __init__(self, tokens: Sequence[str], freqs: Sequence[int] | None = None,
                 min_freq: int = 1, max_size: int = 10_000):
        self.itos = [PAD, UNK] + list(tokens)
        self.freqs = [0, 0] + list(freqs if freqs is not None else [0] * len(tokens))
        self.stoi = {tok: i for i, tok in enumerate(self.itos)}
        if len(self.stoi) != len(self.itos):
            raise ValueError("duplicate tokens in vocabulary")
        self.min_freq = min_freq
        self.max_size = max_size

    def __len__(self):
        return len(self.itos)

    def __contains__(self, token):
        return token in self.stoi

    def __eq__(self, other):
        return isinstance(other, Vocab) and self.itos == other.itos and self.freqs == other.freqs

    def id(self, token):
        return self.stoi.get(token, UNK_ID)

    def token(self, idx):
        return self.itos[idx]

    def to_text(self) -> str:
        return "".join(f"{tok}\t{freq}\n" for tok, freq in zip(self.itos, self.freqs))

    def digest(self) -> str:
        """sha256 of the serialized vocab, stored in checkpoints."""
        return hashlib.sha256(self.to_text().encode("utf-8")).hexdigest()

    def save(self, path):
        Path(path).write_text(self.to_text(), encoding="utf-8")

    @classmethod
    def load(cls, path):
        raw = Path(path).read_bytes()
        lines = _decode(raw, str(path)).split("\n")
        if lines and lines[-1] == "":
            lines.pop()
        entries = []
        for lineno, line in enumerate(lines, 1):
            tok, sep, freq = line.rpartition("\t")
            if not sep or not freq.isdigit():
                raise ParseError(f"{path}:{lineno}: expected 'token<TAB>frequency'", line=lineno)
            entries.append((tok, int(freq)))
        if len(entries) < 2 or entries[0][0] != PAD or entries[1][0] != UNK:
            raise ParseError(f"{path}: vocab must start with {PAD} and {UNK} header lines")
        body = entries[2:]
        return cls([t for t, _ in body], [f for _, f in body])


def build_vocab(corpus: Iterable[str], min_freq: int = 1, max_size: int = 10_000,
                tokenizer=tokenize) -> Vocab:
    """Frequency-ranked vocabulary; ties keep first-seen order."""
    if min_freq < 1 or max_size < 1:
        raise ValueError("min_freq and max_size must be >= 1")
    counts: Counter[str] = Counter()
    for text in corpus:
        counts.update(tokenizer(text))
    # Counter preserves insertion order and sorted() is stable
    ranked = sorted(counts.items(), key=lambda kv: -kv[1])
    kept = [(tok, n) for tok, n in ranked if n >= min_freq and tok not in (PAD, UNK)][:max_size]
    return Vocab([t for t, _ in kept], [n for _, n in kept], min_freq=min_freq, max_size=max_size)


def encode(tokens: Sequence[str], vocab: Vocab, pad_size: int) -> np.ndarray:
    if pad_size < 1:
        raise ValueError("pad_size must be >= 1")
    out = np.zeros(pad_size, dtype=np.int64)
    ids = [vocab.id(tok) for tok in tokens[:pad_size]]
    out[:len(ids)] = ids
    return out


def ngram_ids(char_ids, n: int, n_buckets: int) -> np.ndarray:
    """Hashed n-gram bucket per position (1-d or 2-d input).

    Position i holds the FNV-1a hash of ``char_ids[i-n+1 .. i]`` modulo
    ``n_buckets`` when every id in the window is non-PAD, else bucket 0.
    """
    if n_buckets < 1:
        raise ValueError("n_buckets must be >= 1")
    arr = np.asarray(char_ids, dtype=np.int64)
    out = kernels.fnv1a_ngrams(np.atleast_2d(arr), n, n_buckets)
    return out[0] if arr.ndim == 1 else out


@dataclass
class EncodedExample:
    char_ids: np.ndarray
    bigram_ids: np.ndarray
    trigram_ids: np.ndarray
    label: int


@dataclass
class Batch:
    char_ids: np.ndarray     # [batch, pad_size]
    bigram_ids: np.ndarray
    trigram_ids: np.ndarray
    labels: np.ndarray       # [batch]

    def __len__(self):
        return len(self.labels)


@dataclass
class EncodedDataset:
    """Column-stacked encoded examples; indexing yields :class:`EncodedExample`."""

    char_ids: np.ndarray
    bigram_ids: np.ndarray
    trigram_ids: np.ndarray
    labels: np.ndarray

    def __len__(self):
        return len(self.labels)

    def __getitem__(self, i):
        return EncodedExample(self.char_ids[i], self.bigram_ids[i], self.trigram_ids[i],
                              int(self.labels[i]))

    def take(self, index) -> Batch:
        index = np.asarray(index)
        return Batch(self.char_ids[index], self.bigram_ids[index], self.trigram_ids[index],
                     self.labels[index])

    @property
    def pad_size(self):
        return self.char_ids.shape[1]

    @classmethod
    def from_examples(cls, examples: Sequence[EncodedExample]):
        return cls(np.stack([e.char_ids for e in examples]),
                   np.stack([e.bigram_ids for e in examples]),
                   np.stack([e.trigram_ids for e in examples]),
                   np.array([e.label for e in examples], dtype=np.int64))


def encode_dataset(pairs: Sequence[tuple[str, int]], vocab: Vocab, pad_size: int = 32,
                   n_buckets: int = 250_000, tokenizer=tokenize) -> EncodedDataset:
    char_ids = np.zeros((len(pairs), pad_size), dtype=np.int64)
    for row, (text, _) in enumerate(pairs):
        char_ids[row] = encode(tokenizer(text), vocab, pad_size)
    labels = np.array([label for _, label in pairs], dtype=np.int64)
    return EncodedDataset(char_ids, ngram_ids(char_ids, 2, n_buckets),
                          ngram_ids(char_ids, 3, n_buckets), labels)


def load_dataset(path, num_class: int = 10) -> list[tuple[str, int]]:
    """Read ``text<TAB>label`` lines; blank lines are skipped."""
    out = []
    with open(path, "rb") as fh:
        for lineno, raw in enumerate(fh, 1):
            try:
                line = raw.decode("utf-8").rstrip("\r\n")
            except UnicodeDecodeError as exc:
                raise InputEncodingError(
                    f"{path}:{lineno}: invalid UTF-8 at byte offset {exc.start}",
                    offset=exc.start) from None
            if not line.strip():
                continue
            text, sep, label = line.rpartition("\t")
            if not sep:
                raise ParseError(f"{path}:{lineno}: expected 'text<TAB>label'", line=lineno)
            try:
                value = int(label)
            except ValueError:
                raise ParseError(f"{path}:{lineno}: label {label!r} is not an integer",
                                 line=lineno) from None
            if not 0 <= value < num_class:
                raise LabelError(f"{path}:{lineno}: label {value} outside [0, {num_class})",
                                 line=lineno)
            out.append((text, value))
    return out


def batch_iter(examples, batch_size: int, shuffle: bool = False,
               seed: int = 0) -> Iterator[Batch]:
    """Yield every example exactly once; the last batch may be short."""
    if batch_size < 1:
        raise ValueError("batch_size must be >= 1")
    if not isinstance(examples, EncodedDataset):
        if len(examples) == 0:
            return
        examples = EncodedDataset.from_examples(examples)
    n = len(examples)
    order = np.random.default_rng(seed).permutation(n) if shuffle else np.arange(n)
    for start in range(0, n, batch_size):
        yield examples.take(order[start:start + batch_size])


def default_class_names() -> list[str]:
    text = resources.files("textclf").joinpath("data/class.txt").read_text(encoding="utf-8")
    return [line.strip() for line in text.splitlines() if line.strip()]


def load_class_names(path) -> list[str]:
    text = _decode(Path(path).read_bytes(), str(path))
    return [line.strip() for line in text.splitlines() if line.strip()]
