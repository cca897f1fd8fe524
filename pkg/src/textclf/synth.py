"""Seeded synthetic headline corpus.

Each class owns a disjoint block of signature characters; every headline is
20-30 characters with 40% drawn from its class's signature block and the rest
from a shared background pool. Characters come from the CJK block so files
look like the real headline corpus.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np

from .text import default_class_names

CJK_BASE = 0x4E00
SIGNATURE_SIZE = 30
SIGNATURE_RATIO = 0.4
MIN_LEN, MAX_LEN = 20, 30
SPLITS = (("train", 0.70), ("dev", 0.15), ("test", 0.15))


def token_char(i: int) -> str:
    return chr(CJK_BASE + i)


def class_names_for(num_class: int) -> list[str]:
    names = default_class_names()
    return names[:num_class] + [f"class_{c}" for c in range(len(names), num_class)]


def split_sizes(per_class: int) -> tuple[int, int, int]:
    n_train = round(per_class * SPLITS[0][1])
    n_dev = round(per_class * SPLITS[1][1])
    return n_train, n_dev, per_class - n_train - n_dev


def generate(num_class=10, per_class=1000, vocab_size=2000, seed=42):
    """Return ``{"train"|"dev"|"test": [(text, label), ...]}``."""
    if num_class < 2 or per_class < 10:
        raise ValueError("need at least 2 classes and 10 examples per class")
    background = vocab_size - num_class * SIGNATURE_SIZE
    if background < 1:
        raise ValueError(f"vocab_size must exceed {num_class * SIGNATURE_SIZE} "
                         f"({SIGNATURE_SIZE} signature tokens per class)")
    rng = np.random.default_rng(seed)
    sizes = split_sizes(per_class)
    splits = {name: [] for name, _ in SPLITS}
    for label in range(num_class):
        texts = []
        for _ in range(per_class):
            length = int(rng.integers(MIN_LEN, MAX_LEN + 1))
            n_sig = round(SIGNATURE_RATIO * length)
            sig = label * SIGNATURE_SIZE + rng.integers(0, SIGNATURE_SIZE, n_sig)
            bg = num_class * SIGNATURE_SIZE + rng.integers(0, background, length - n_sig)
            ids = rng.permutation(np.concatenate([sig, bg]))
            texts.append("".join(token_char(int(i)) for i in ids))
        start = 0
        for (name, _), size in zip(SPLITS, sizes):
            splits[name].extend((t, label) for t in texts[start:start + size])
            start += size
    for name in splits:
        order = rng.permutation(len(splits[name]))
        splits[name] = [splits[name][i] for i in order]
    return splits


def write_corpus(out_dir, num_class=10, per_class=1000, vocab_size=2000, seed=42):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    splits = generate(num_class, per_class, vocab_size, seed)
    for name, pairs in splits.items():
        with open(out / f"{name}.txt", "w", encoding="utf-8", newline="\n") as fh:
            fh.writelines(f"{text}\t{label}\n" for text, label in pairs)
    (out / "class.txt").write_text("".join(n + "\n" for n in class_names_for(num_class)),
                                   encoding="utf-8")
    return splits


def signature_classify(text: str, num_class: int) -> int:
    """Counting baseline: the class whose signature characters occur most often."""
    votes = np.zeros(num_class, dtype=np.int64)
    for ch in text:
        idx = ord(ch) - CJK_BASE
        if 0 <= idx < num_class * SIGNATURE_SIZE:
            votes[idx // SIGNATURE_SIZE] += 1
    return int(np.argmax(votes))
