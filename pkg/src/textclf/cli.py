"""``textclf`` command-line entry point."""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import experiment, synth
from .config import MODEL_CHOICES, resolve
from .errors import TextClfError
from .metrics import render_csv, render_report

# flag dest -> RunConfig key
TRAIN_FLAGS = {
    "model": "model", "data_dir": "data_dir", "out_dir": "out_dir", "seed": "seed",
    "pad_size": "pad_size", "embed_size": "embed_size", "hidden_size": "hidden_size",
    "n_filters": "n_filters", "kernel_sizes": "kernel_sizes", "n_buckets": "n_buckets",
    "lr": "lr", "batch_size": "batch_size", "max_epochs": "max_epochs",
    "patience": "patience", "jobs": "jobs", "eval_interval": "eval_interval",
    "optimizer": "optimizer", "tokenizer": "tokenizer", "rnn_pooling": "rnn_pooling",
}


def _kernel_sizes(text):
    try:
        return tuple(int(p) for p in text.split(",") if p.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated ints, got {text!r}") from None


def build_parser():
    parser = argparse.ArgumentParser(prog="textclf",
                                     description="TextCNN / TextRNN / FastText headline classifiers")
    parser.add_argument("-v", "--verbose", action="store_true", help="log training progress")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train one model (or all three) and write a run directory")
    p.add_argument("--model", choices=MODEL_CHOICES)
    p.add_argument("--data-dir")
    p.add_argument("--out-dir")
    p.add_argument("--config", help="flat key = value config file")
    p.add_argument("--seed", type=int)
    p.add_argument("--pad-size", type=int)
    p.add_argument("--embed-size", type=int)
    p.add_argument("--hidden-size", type=int)
    p.add_argument("--n-filters", type=int)
    p.add_argument("--kernel-sizes", type=_kernel_sizes)
    p.add_argument("--n-buckets", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--batch-size", type=int)
    p.add_argument("--max-epochs", type=int)
    p.add_argument("--patience", type=int)
    p.add_argument("--eval-interval", type=int)
    p.add_argument("--optimizer", choices=("sgd", "adam"))
    p.add_argument("--tokenizer", choices=("char", "word"))
    p.add_argument("--rnn-pooling", choices=("last", "mean", "max"))
    p.add_argument("--jobs", type=int, help="parallel trainings when --model all")

    p = sub.add_parser("eval", help="evaluate a trained run on a dataset split")
    p.add_argument("--out-dir", required=True, help="run directory")
    p.add_argument("--data-dir", required=True)
    p.add_argument("--split", choices=experiment.SPLIT_NAMES, default="test")
    p.add_argument("--checkpoint")
    p.add_argument("--csv", action="store_true")

    p = sub.add_parser("predict", help="classify stdin lines with a trained run")
    p.add_argument("--out-dir", required=True, help="run directory")
    p.add_argument("--checkpoint")

    p = sub.add_parser("gensynth", help="write a synthetic headline corpus")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--classes", type=int, default=10)
    p.add_argument("--per-class", type=int, default=1000)
    p.add_argument("--vocab-size", type=int, default=2000)
    p.add_argument("--seed", type=int, default=42)

    p = sub.add_parser("report", help="re-render saved report(s)")
    p.add_argument("--out-dir", required=True, help="run directory or directory of runs")
    p.add_argument("--csv", action="store_true")
    p.add_argument("--averages", action="store_true", help="add macro and weighted averages")
    return parser


def cmd_train(args):
    flags = {key: getattr(args, dest) for dest, key in TRAIN_FLAGS.items()}
    cfg = resolve(flags, args.config)
    if cfg.model == "all":
        out = experiment.train_all(cfg)
        sys.stdout.write((out / "comparison.txt").read_text(encoding="utf-8"))
    else:
        out = experiment.train_run(cfg)
        sys.stdout.write((out / "report.txt").read_text(encoding="utf-8"))
    return 0


def cmd_eval(args):
    report = experiment.eval_run(args.out_dir, args.data_dir, args.split, args.checkpoint)
    sys.stdout.write(render_csv(report) if args.csv else render_report(report))
    return 0


def cmd_predict(args):
    lines = [line.rstrip("\r\n") for line in sys.stdin]
    if not lines:
        return 0
    model, vocab, meta = experiment.load_run(args.out_dir, args.checkpoint)
    for name in experiment.predict_lines(model, vocab, meta, lines):
        sys.stdout.write(name + "\n")
    return 0


def cmd_gensynth(args):
    try:
        splits = synth.write_corpus(args.out_dir, args.classes, args.per_class, args.vocab_size,
                                    args.seed)
    except ValueError as exc:
        raise SystemExit(f"textclf gensynth: error: {exc}") from None
    counts = ", ".join(f"{name} {len(pairs)}" for name, pairs in splits.items())
    print(f"wrote {counts} examples to {args.out_dir}")
    return 0


def cmd_report(args):
    run = Path(args.out_dir)
    if (run / "report.json").exists():
        report = experiment.load_report(run)
        if args.csv:
            sys.stdout.write(render_csv(report))
        else:
            sys.stdout.write(render_report(report, averages=args.averages))
    else:
        sys.stdout.write(experiment.render_run_set(run))
    return 0


COMMANDS = {"train": cmd_train, "eval": cmd_eval, "predict": cmd_predict,
            "gensynth": cmd_gensynth, "report": cmd_report}


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(asctime)s %(name)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (TextClfError, OSError) as exc:
        print(f"textclf {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
