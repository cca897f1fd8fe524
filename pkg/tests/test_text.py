import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from textclf import text
from textclf.errors import InputEncodingError, LabelError, ParseError
from textclf.text import PAD_ID, UNK_ID, Vocab, batch_iter, build_vocab, encode, ngram_ids, tokenize


def fnv1a_reference(ids):
    """Byte-at-a-time 64-bit FNV-1a over 4-byte little-endian ids, in plain ints."""
    h = 0xCBF29CE484222325
    for tok in ids:
        for byte in int(tok).to_bytes(4, "little"):
            h ^= byte
            h = (h * 0x100000001B3) & 0xFFFFFFFFFFFFFFFF
    return h


def test_fnv_reference_known_vector():
    # FNV-1a 64 of the empty input is the offset basis; of b"a" is a published vector
    assert fnv1a_reference([]) == 0xCBF29CE484222325
    h = 0xCBF29CE484222325 ^ ord("a")
    assert (h * 0x100000001B3) & 0xFFFFFFFFFFFFFFFF == 0xAF63DC4C8601EC8C


def test_tokenize():
    assert tokenize("股票上涨") == ["股", "票", "上", "涨"]
    assert tokenize("") == []
    assert tokenize("a b") == ["a", "b"]
    assert tokenize("a\tb　c\n") == ["a", "b", "c"]


def test_tokenize_invalid_utf8_reports_offset():
    with pytest.raises(InputEncodingError) as err:
        tokenize(b"ab\xffcd")
    assert err.value.offset == 2


def test_build_vocab_counts():
    v = build_vocab(["aab", "ab"])
    assert v.stoi == {"<PAD>": 0, "<UNK>": 1, "a": 2, "b": 3}
    assert v.freqs == [0, 0, 3, 2]
    assert build_vocab(["aab", "ab"], min_freq=3).itos == ["<PAD>", "<UNK>", "a"]
    assert build_vocab(["aab", "ab"], max_size=1).itos == ["<PAD>", "<UNK>", "a"]


def test_build_vocab_ties_keep_first_seen():
    assert build_vocab(["bca"]).itos[2:] == ["b", "c", "a"]


def test_build_vocab_empty_corpus():
    assert len(build_vocab([])) == 2


@settings(max_examples=50, deadline=None)
@given(st.lists(st.text(alphabet="abcdef 股票", max_size=12), max_size=8),
       st.integers(1, 3), st.integers(1, 5))
def test_vocab_invariants(corpus, min_freq, max_size):
    v = build_vocab(corpus, min_freq, max_size)
    counts = {}
    for t in corpus:
        for ch in tokenize(t):
            counts[ch] = counts.get(ch, 0) + 1
    assert v.itos[:2] == ["<PAD>", "<UNK>"]
    assert sorted(v.stoi.values()) == list(range(len(v)))
    assert len(v) <= max_size + 2
    assert all(counts[tok] >= min_freq for tok in v.itos[2:])


def test_vocab_file_round_trip(tmp_path):
    v = build_vocab(["涨停股盘点", "股票"])
    v.save(tmp_path / "vocab.txt")
    lines = (tmp_path / "vocab.txt").read_text(encoding="utf-8").splitlines()
    assert lines[:3] == ["<PAD>\t0", "<UNK>\t0", "股\t2"]
    assert Vocab.load(tmp_path / "vocab.txt") == v
    assert Vocab.load(tmp_path / "vocab.txt").digest() == v.digest()


def test_encode_pad_oov_truncate():
    v = build_vocab(["ab"])
    assert encode(["a", "b"], v, 4).tolist() == [2, 3, 0, 0]
    assert encode(["a", "z"], v, 3).tolist() == [2, UNK_ID, 0]
    assert len(encode(["a"] * 40, v, 32)) == 32


@settings(max_examples=50, deadline=None)
@given(st.text(alphabet="abcdefgh", max_size=15))
def test_encode_round_trip(s):
    v = build_vocab(["abcdefgh"])
    ids = encode(tokenize(s), v, 16)
    assert [v.token(i) for i in ids if i != PAD_ID] == tokenize(s)


def test_ngram_all_pad():
    assert not ngram_ids(np.zeros(8, dtype=np.int64), 2, 100).any()


def test_ngram_reference_hash():
    out = ngram_ids([5, 7, 9], 2, 1000)
    assert out.tolist() == [0, fnv1a_reference([5, 7]) % 1000, fnv1a_reference([7, 9]) % 1000]


def test_ngram_fast_trigrams():
    v = build_vocab(["fast"])
    ids = encode(tokenize("fast"), v, 6)
    tri = ngram_ids(ids, 3, 250_000)
    # exactly two interior trigrams: "fas" ending at 2 and "ast" ending at 3
    assert tri[0] == tri[1] == 0 and tri[4] == tri[5] == 0
    assert tri[2] == fnv1a_reference([v.id("f"), v.id("a"), v.id("s")]) % 250_000
    assert tri[3] == fnv1a_reference([v.id("a"), v.id("s"), v.id("t")]) % 250_000


@settings(max_examples=30, deadline=None)
@given(st.lists(st.integers(0, 2**31 - 1), min_size=1, max_size=12), st.sampled_from([2, 3]),
       st.integers(1, 10_000))
def test_ngram_matches_reference(ids, n, buckets):
    out = ngram_ids(ids, n, buckets)
    for i, value in enumerate(out):
        window = ids[i - n + 1:i + 1] if i >= n - 1 else None
        if window is None or 0 in window:
            assert value == 0
        else:
            assert value == fnv1a_reference(window) % buckets


def test_load_dataset(tmp_path):
    p = tmp_path / "d.txt"
    p.write_text("涨停股盘点\t2\n\n股票\t0\n", encoding="utf-8")
    assert text.load_dataset(p, 10) == [("涨停股盘点", 2), ("股票", 0)]


def test_load_dataset_errors(tmp_path):
    p = tmp_path / "d.txt"
    p.write_text("ok\t1\nbad\t10\n", encoding="utf-8")
    with pytest.raises(LabelError) as err:
        text.load_dataset(p, 10)
    assert err.value.line == 2
    p.write_text("ok\t1\nno label here\n", encoding="utf-8")
    with pytest.raises(ParseError) as err:
        text.load_dataset(p, 10)
    assert err.value.line == 2
    p.write_bytes(b"ok\t1\n\xfe\t1\n")
    with pytest.raises(InputEncodingError):
        text.load_dataset(p, 10)


def small_dataset(n):
    ids = np.arange(n * 3).reshape(n, 3) + 2
    return text.EncodedDataset(ids, ids, ids, np.arange(n))


def test_batch_iter_sizes_and_order():
    data = small_dataset(10)
    assert [len(b) for b in batch_iter(data, 4)] == [4, 4, 2]
    assert np.concatenate([b.labels for b in batch_iter(data, 4)]).tolist() == list(range(10))


def test_batch_iter_seeded_shuffle():
    data = small_dataset(10)
    a = [b.labels.tolist() for b in batch_iter(data, 3, shuffle=True, seed=7)]
    b = [b.labels.tolist() for b in batch_iter(data, 3, shuffle=True, seed=7)]
    assert a == b
    assert sorted(sum(a, [])) == list(range(10))


def test_batch_iter_accepts_examples_and_empty():
    data = small_dataset(5)
    batches = list(batch_iter([data[i] for i in range(5)], 2))
    assert [len(b) for b in batches] == [2, 2, 1]
    assert list(batch_iter([], 4)) == []


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 40), st.integers(1, 12), st.integers(0, 1000))
def test_epoch_completeness(n, batch_size, seed):
    labels = np.concatenate([b.labels for b in batch_iter(small_dataset(n), batch_size, True, seed)])
    assert sorted(labels.tolist()) == list(range(n))


def test_default_class_names():
    assert text.default_class_names() == ["finance", "realty", "stocks", "education", "science",
                                          "society", "politics", "sports", "game", "entertainment"]
