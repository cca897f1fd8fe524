"""Flat ``key = value`` run configuration.

Precedence is command-line flag, then config file, then the defaults below.
Lists are comma separated; ``none`` clears an optional value.
"""
from __future__ import annotations

import typing
from dataclasses import asdict, dataclass, fields
from pathlib import Path

from .errors import ConfigError
from .models import ARCHITECTURES, RNN_POOLING, ModelConfig
from .training import OPTIMIZERS, TrainConfig

MODEL_CHOICES = ARCHITECTURES + ("all",)


@dataclass
class RunConfig:
    model: str = "textcnn"
    data_dir: str = "data"
    out_dir: str = "runs"
    seed: int = 42
    tokenizer: str = "char"
    min_freq: int = 1
    max_vocab_size: int = 10_000
    pad_size: int = 32
    n_buckets: int = 250_000
    embed_size: int = 128
    hidden_size: int = 128
    n_filters: int = 100
    kernel_sizes: tuple = (2, 3, 4)
    rnn_pooling: str = "last"
    optimizer: str = "adam"
    lr: float = 1e-3
    batch_size: int = 128
    max_epochs: int = 20
    patience: int = 1000
    eval_interval: int = 100
    clip_norm: typing.Optional[float] = None
    jobs: int = 1

    def validate(self):
        if self.model not in MODEL_CHOICES:
            raise ConfigError(f"unknown model {self.model!r}; valid models: "
                              f"{', '.join(ARCHITECTURES)} (or 'all')")
        if self.tokenizer not in ("char", "word"):
            raise ConfigError("tokenizer must be 'char' or 'word'")
        if self.rnn_pooling not in RNN_POOLING:
            raise ConfigError(f"rnn_pooling must be one of {', '.join(RNN_POOLING)}")
        if self.optimizer not in OPTIMIZERS:
            raise ConfigError(f"optimizer must be one of {', '.join(OPTIMIZERS)}")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")
        self.train_config()
        return self

    def model_config(self, vocab_size, num_class) -> ModelConfig:
        return ModelConfig(vocab_size=vocab_size, num_class=num_class, pad_size=self.pad_size,
                           embed_size=self.embed_size, n_filters=self.n_filters,
                           kernel_sizes=self.kernel_sizes, hidden_size=self.hidden_size,
                           n_buckets=self.n_buckets, rnn_pooling=self.rnn_pooling)

    def train_config(self) -> TrainConfig:
        return TrainConfig(learning_rate=self.lr, batch_size=self.batch_size,
                           max_epochs=self.max_epochs, patience_batches=self.patience,
                           eval_interval_batches=self.eval_interval, optimizer=self.optimizer,
                           seed=self.seed, clip_norm=self.clip_norm)

    def to_text(self) -> str:
        lines = []
        for key, value in asdict(self).items():
            lines.append(f"{key} = {format_value(value)}")
        return "\n".join(lines) + "\n"


_TYPES = {f.name: f.type for f in fields(RunConfig)}


def format_value(value):
    if value is None:
        return "none"
    if isinstance(value, (tuple, list)):
        return ",".join(str(v) for v in value)
    return str(value)


def parse_value(key, raw):
    kind = _TYPES[key]
    raw = raw.strip()
    try:
        if kind in (int, "int"):
            return int(raw)
        if kind in (float, "float"):
            return float(raw)
        if kind in (tuple, "tuple"):
            return tuple(int(p) for p in raw.split(",") if p.strip())
        if kind in (typing.Optional[float], "typing.Optional[float]"):
            return None if raw.lower() in ("none", "") else float(raw)
    except ValueError:
        raise ConfigError(f"bad value for {key}: {raw!r}") from None
    return raw


def normalize_key(key):
    key = key.strip().replace("-", "_")
    if key not in _TYPES:
        raise ConfigError(f"unknown config key {key!r}")
    return key


def read_config_file(path) -> dict:
    values = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, raw = line.partition("=")
        if not sep:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key = normalize_key(key)
        values[key] = parse_value(key, raw)
    return values


def resolve(flags: dict, config_path=None) -> RunConfig:
    """Merge flag values (``None`` = not given) over the config file over defaults."""
    merged = read_config_file(config_path) if config_path else {}
    for key, value in flags.items():
        if value is not None:
            merged[normalize_key(key)] = value
    return RunConfig(**merged).validate()
