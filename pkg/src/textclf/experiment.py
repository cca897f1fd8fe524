"""Run-directory orchestration shared by the CLI commands.

A run directory holds everything one training run produces::

    checkpoint.tcf1  vocab.txt  class.txt  config.txt
    history.csv  report.txt  report.csv  report.json  summary.json
"""
from __future__ import annotations

import json
import logging
import multiprocessing
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

from . import checkpoint
from .config import RunConfig
from .errors import ConfigError
from .metrics import MetricsReport, predict, render_comparison, render_csv, render_report
from .models import ARCHITECTURES, ModelConfig, init_params
from .text import (Vocab, batch_iter, build_vocab, default_class_names, encode_dataset, get_tokenizer,
                   load_class_names, load_dataset)
from .training import evaluate, train

logger = logging.getLogger(__name__)

SPLIT_NAMES = ("train", "dev", "test")


def data_class_names(data_dir) -> list[str]:
    path = Path(data_dir) / "class.txt"
    return load_class_names(path) if path.exists() else default_class_names()


def load_split(data_dir, split, num_class):
    path = Path(data_dir) / f"{split}.txt"
    if not path.exists():
        raise ConfigError(f"missing dataset file {path}")
    return load_dataset(path, num_class)


def _write(path, text):
    Path(path).write_text(text, encoding="utf-8", newline="\n")


def train_run(cfg: RunConfig) -> Path:
    """Train one architecture end to end and populate ``cfg.out_dir``."""
    out = Path(cfg.out_dir)
    names = data_class_names(cfg.data_dir)
    splits = {s: load_split(cfg.data_dir, s, len(names)) for s in SPLIT_NAMES}
    out.mkdir(parents=True, exist_ok=True)
    tokenizer = get_tokenizer(cfg.tokenizer)
    vocab_path = out / "vocab.txt"
    if vocab_path.exists():
        vocab = Vocab.load(vocab_path)
    else:
        vocab = build_vocab((t for t, _ in splits["train"]), cfg.min_freq, cfg.max_vocab_size,
                            tokenizer)
        vocab.save(vocab_path)
    encoded = {s: encode_dataset(pairs, vocab, cfg.pad_size, cfg.n_buckets, tokenizer)
               for s, pairs in splits.items()}
    mcfg = cfg.model_config(len(vocab), len(names))
    model = init_params(cfg.model, mcfg, cfg.seed)
    logger.info("training %s on %d examples", cfg.model, len(encoded["train"]))
    result = train(model, encoded["train"], encoded["dev"], cfg.train_config())
    meta = {"architecture": cfg.model, "config": mcfg.to_dict(), "vocab_hash": vocab.digest(),
            "tokenizer": cfg.tokenizer, "class_names": names}
    checkpoint.save_checkpoint(result.best_state, meta, out / "checkpoint.tcf1")
    report = evaluate(model, encoded["test"], class_names=names)
    _write(out / "class.txt", "".join(n + "\n" for n in names))
    _write(out / "config.txt", cfg.to_text())
    _write(out / "history.csv", result.history.to_csv())
    save_report(report, out)
    hist = result.history
    summary = {"architecture": cfg.model, "stop_reason": hist.stop_reason,
               "best_batch": hist.best_batch, "best_dev_loss": hist.best_dev_loss,
               "epoch_seconds": hist.epoch_seconds,
               "mean_epoch_seconds": sum(hist.epoch_seconds) / len(hist.epoch_seconds)}
    _write(out / "summary.json", json.dumps(summary, indent=2) + "\n")
    return out


def save_report(report: MetricsReport, out_dir):
    out = Path(out_dir)
    _write(out / "report.txt", render_report(report))
    _write(out / "report.csv", render_csv(report))
    _write(out / "report.json", json.dumps(report.to_dict(), indent=1) + "\n")


def load_report(run_dir) -> MetricsReport:
    path = Path(run_dir) / "report.json"
    if not path.exists():
        raise ConfigError(f"no saved report in {run_dir}")
    return MetricsReport.from_dict(json.loads(path.read_text(encoding="utf-8")))


def _train_one(cfg):
    return str(train_run(cfg))


def train_all(cfg: RunConfig) -> Path:
    """Train every architecture into ``out_dir/<name>`` and write a comparison."""
    out = Path(cfg.out_dir)
    jobs = [replace(cfg, model=arch, out_dir=str(out / arch)) for arch in ARCHITECTURES]
    if cfg.jobs > 1:
        ctx = multiprocessing.get_context("spawn")
        with ProcessPoolExecutor(max_workers=min(cfg.jobs, len(jobs)), mp_context=ctx) as pool:
            list(pool.map(_train_one, jobs))
    else:
        for job in jobs:
            train_run(job)
    _write(out / "comparison.txt", render_run_set(out))
    return out


def run_set(run_dir):
    """Subdirectories holding saved reports, in architecture order when possible."""
    root = Path(run_dir)
    found = {p.name: p for p in sorted(root.iterdir()) if (p / "report.json").exists()}
    ordered = [a for a in ARCHITECTURES if a in found] + [n for n in found if n not in ARCHITECTURES]
    return {name: found[name] for name in ordered}


def render_run_set(run_dir) -> str:
    reports = {name: load_report(path) for name, path in run_set(run_dir).items()}
    if not reports:
        raise ConfigError(f"no saved reports under {run_dir}")
    parts = [render_comparison(reports)]
    for name, rep in reports.items():
        parts.append(f"\n[{name}]\n" + render_report(rep))
    return "".join(parts)


def load_run(run_dir, checkpoint_path=None):
    """Rebuild the trained model of a run directory; checks the vocab hash."""
    run = Path(run_dir)
    vocab_path = run / "vocab.txt"
    if not vocab_path.exists():
        raise ConfigError(f"missing vocabulary {vocab_path}")
    vocab = Vocab.load(vocab_path)
    params, meta = checkpoint.load_checkpoint(checkpoint_path or run / "checkpoint.tcf1",
                                              vocab_hash=vocab.digest())
    model = init_params(meta["architecture"], ModelConfig.from_dict(meta["config"]), seed=0)
    checkpoint.check_against(params, {n: p.shape for n, p in model.params.items()})
    model.load_state_dict(params)
    return model, vocab, meta


def eval_run(run_dir, data_dir, split="test", checkpoint_path=None) -> MetricsReport:
    model, vocab, meta = load_run(run_dir, checkpoint_path)
    names = meta["class_names"]
    pairs = load_split(data_dir, split, len(names))
    cfg = model.config
    data = encode_dataset(pairs, vocab, cfg.pad_size, cfg.n_buckets,
                          get_tokenizer(meta.get("tokenizer", "char")))
    return evaluate(model, data, class_names=names)


def predict_lines(model, vocab, meta, lines) -> list[str]:
    """Class name for each input line, in order."""
    if not lines:
        return []
    names = meta["class_names"]
    cfg = model.config
    data = encode_dataset([(line, 0) for line in lines], vocab, cfg.pad_size, cfg.n_buckets,
                          get_tokenizer(meta.get("tokenizer", "char")))
    out = []
    for batch in batch_iter(data, 512):
        out.extend(names[i] for i in predict(model.forward(batch).data))
    return out
