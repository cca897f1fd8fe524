"""TCF1 checkpoint container.

Layout::

    b"TCF1"
    uint32 little-endian  N = byte length of the metadata
    N bytes               UTF-8 JSON metadata
    raw little-endian float32 values, one tensor after another in manifest order

The metadata carries ``format_version``, ``architecture``, ``config``,
``vocab_hash`` and ``tensors`` (a list of ``{"name", "shape"}``), plus any
extra keys the caller supplies.
"""
from __future__ import annotations

import json
import os
import struct
from math import prod

import numpy as np

from .errors import MagicError, ManifestError, VocabHashError

MAGIC = b"TCF1"
FORMAT_VERSION = 1
_LE_F32 = np.dtype("<f4")


def save_checkpoint(params: dict, meta: dict, path) -> None:
    """Write ``params`` (name -> float32 array) with ``meta`` to ``path``."""
    manifest = [{"name": name, "shape": list(np.shape(arr))} for name, arr in params.items()]
    header = dict(meta, format_version=FORMAT_VERSION, tensors=manifest)
    blob = json.dumps(header, sort_keys=True, ensure_ascii=False).encode("utf-8")
    tmp = f"{path}.tmp"
    with open(tmp, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", len(blob)))
        fh.write(blob)
        for arr in params.values():
            np.ascontiguousarray(arr, dtype=_LE_F32).tofile(fh)
    os.replace(tmp, path)


def read_meta(path) -> dict:
    with open(path, "rb") as fh:
        return _read_header(fh, os.fstat(fh.fileno()).st_size)[0]


def _read_header(fh, size):
    magic = fh.read(4)
    if magic != MAGIC:
        raise MagicError(f"not a TCF1 checkpoint (magic {magic!r})")
    raw_len = fh.read(4)
    if len(raw_len) != 4:
        raise ManifestError("truncated checkpoint header")
    (n,) = struct.unpack("<I", raw_len)
    blob = fh.read(n)
    if len(blob) != n:
        raise ManifestError("truncated checkpoint metadata")
    try:
        meta = json.loads(blob.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ManifestError(f"unreadable checkpoint metadata: {exc}") from None
    if meta.get("format_version") != FORMAT_VERSION:
        raise MagicError(f"unsupported checkpoint version {meta.get('format_version')!r}")
    manifest = meta.get("tensors")
    if not isinstance(manifest, list):
        raise ManifestError("checkpoint metadata has no tensor manifest")
    expected = 8 + n + 4 * sum(prod(t["shape"]) for t in manifest)
    if size != expected:
        raise ManifestError(f"checkpoint payload is {size} bytes, manifest implies {expected}")
    return meta, manifest


def load_checkpoint(path, vocab_hash: str | None = None):
    """Return ``(params, meta)``; nothing is returned unless the whole file checks out."""
    with open(path, "rb") as fh:
        meta, manifest = _read_header(fh, os.fstat(fh.fileno()).st_size)
        if vocab_hash is not None and meta.get("vocab_hash") != vocab_hash:
            raise VocabHashError(
                f"checkpoint vocab hash {meta.get('vocab_hash')!r} does not match {vocab_hash!r}")
        params = {}
        for entry in manifest:
            count = prod(entry["shape"])
            arr = np.fromfile(fh, dtype=_LE_F32, count=count)
            if arr.size != count:
                raise ManifestError(f"tensor {entry['name']!r} is truncated")
            params[entry["name"]] = arr.astype(np.float32).reshape(entry["shape"])
    return params, meta


def check_against(params: dict, expected_shapes: dict) -> None:
    """Raise ManifestError unless names and shapes match a model's parameters."""
    if list(params) != list(expected_shapes):
        raise ManifestError(f"tensor names {list(params)} != expected {list(expected_shapes)}")
    for name, arr in params.items():
        if tuple(arr.shape) != tuple(expected_shapes[name]):
            raise ManifestError(f"{name}: shape {arr.shape} != expected {expected_shapes[name]}")
