"""Cross-entropy loss, SGD/Adam, and the early-stopping training loop."""
from __future__ import annotations

import io
import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import ConfigError, LabelError
from .metrics import ConfusionMatrix, MetricsReport, predict
from .models import Classifier
from .tensor import Tape, Tensor, backward, record
from .text import EncodedDataset, batch_iter

logger = logging.getLogger(__name__)

OPTIMIZERS = ("sgd", "adam")


def loss_forward(logits: Tensor, labels) -> Tensor:
    """Mean categorical cross-entropy of softmax(logits) against integer labels.

    Uses the log-sum-exp form; the gradient w.r.t. logits is
    ``(softmax - one_hot) / N``.
    """
    labels = np.asarray(labels, dtype=np.int64)
    N, C = logits.shape
    if labels.shape != (N,):
        raise ValueError(f"labels shape {labels.shape} does not match logits {logits.shape}")
    if N and (labels.min() < 0 or labels.max() >= C):
        raise LabelError(f"label outside [0, {C})")
    z = logits.data - logits.data.max(axis=1, keepdims=True)
    lse = np.log(np.exp(z).sum(axis=1, keepdims=True))
    logp = z - lse
    rows = np.arange(N)
    loss = np.float32(-logp[rows, labels].mean()).reshape(())

    def back(g):
        d = np.exp(logp)
        d[rows, labels] -= 1.0
        return (d * (g / np.float32(N)),)

    return record(loss, (logits,), back)


def _grad_rows(p):
    return p.touched_rows() if p.row_sparse else None


class SGD:
    def __init__(self, lr):
        self.lr = lr

    def step(self, params):
        lr = np.float32(self.lr)
        for p in params:
            if p.grad is None:
                continue
            rows = _grad_rows(p)
            if rows is None:
                p.data -= lr * p.grad
            elif rows.size:
                p.data[rows] -= lr * p.grad[rows]


@dataclass
class OptimizerState:
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)
    step: int = 0


class Adam:
    """Bias-corrected Adam.

    Row-sparse tables are updated lazily: only rows with a gradient this step
    have their moments and values touched.
    """

    def __init__(self, lr, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.state = OptimizerState()

    def step(self, params):
        self.state.step += 1
        t = self.state.step
        for p in params:
            if p.grad is None:
                continue
            key = p.name or id(p)
            if key not in self.state.m:
                self.state.m[key] = np.zeros_like(p.data)
                self.state.v[key] = np.zeros_like(p.data)
            rows = _grad_rows(p)
            if rows is not None and rows.size == 0:
                continue
            kernels.adam_update(p.data, p.grad, self.state.m[key], self.state.v[key], rows,
                                self.lr, self.beta1, self.beta2, self.eps, t)


def sgd_step(params, lr):
    SGD(lr).step(params)


def adam_step(params, state: OptimizerState, lr, beta1=0.9, beta2=0.999, eps=1e-8):
    opt = Adam(lr, beta1, beta2, eps)
    opt.state = state
    opt.step(params)
    return state


def make_optimizer(name, lr):
    if name == "sgd":
        return SGD(lr)
    if name == "adam":
        return Adam(lr)
    raise ConfigError(f"unknown optimizer {name!r}; choose from {OPTIMIZERS}")


def clip_grad_norm(params, max_norm):
    """Scale gradients so their global L2 norm is at most ``max_norm``; returns the norm."""
    sq = 0.0
    for p in params:
        if p.grad is None:
            continue
        rows = _grad_rows(p)
        g = p.grad if rows is None else p.grad[rows]
        sq += float(np.dot(g.reshape(-1), g.reshape(-1)))
    norm = math.sqrt(sq)
    if norm > max_norm:
        scale = np.float32(max_norm / (norm + 1e-6))
        for p in params:
            if p.grad is None:
                continue
            rows = _grad_rows(p)
            if rows is None:
                p.grad *= scale
            else:
                p.grad[rows] *= scale
    return norm


@dataclass
class TrainConfig:
    learning_rate: float = 1e-3
    batch_size: int = 128
    max_epochs: int = 20
    patience_batches: int = 1000
    eval_interval_batches: int = 100
    optimizer: str = "adam"
    seed: int = 0
    # None defers to the model's own default; 0 disables clipping
    clip_norm: float | None = None

    def __post_init__(self):
        for name in ("batch_size", "max_epochs", "patience_batches", "eval_interval_batches"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be positive")
        if not self.learning_rate > 0:
            raise ConfigError("learning_rate must be > 0")
        if self.optimizer not in OPTIMIZERS:
            raise ConfigError(f"unknown optimizer {self.optimizer!r}; choose from {OPTIMIZERS}")


@dataclass
class EvalPoint:
    batch: int
    train_loss: float
    dev_loss: float
    dev_acc: float


@dataclass
class TrainHistory:
    points: list = field(default_factory=list)
    stop_reason: str = ""
    best_batch: int = 0
    epoch_seconds: list = field(default_factory=list)

    @property
    def best_dev_loss(self):
        return min(p.dev_loss for p in self.points)

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write("batch,train_loss,dev_loss,dev_acc\n")
        for p in self.points:
            out.write(f"{p.batch},{p.train_loss:.6f},{p.dev_loss:.6f},{p.dev_acc:.6f}\n")
        return out.getvalue()


@dataclass
class TrainResult:
    best_state: dict
    history: TrainHistory


def evaluate(model: Classifier, data: EncodedDataset, batch_size=512, class_names=None):
    """Mean loss and confusion-matrix metrics of ``model`` on ``data``."""
    cm = ConfusionMatrix(model.config.num_class)
    total = 0.0
    for batch in batch_iter(data, batch_size):
        logits = model.forward(batch)
        total += loss_forward(logits, batch.labels).item() * len(batch)
        cm.update_batch(batch.labels, predict(logits.data))
    return MetricsReport.from_confusion(cm, total / len(data), class_names)


def train_step(model, batch, optimizer, clip_norm=None):
    model.zero_grad()
    with Tape() as tape:
        loss = loss_forward(model.forward(batch), batch.labels)
    backward(loss, tape)
    tape.clear()
    params = model.parameters()
    if clip_norm:
        clip_grad_norm(params, clip_norm)
    optimizer.step(params)
    return loss.item()


def train(model: Classifier, train_data: EncodedDataset, dev_data: EncodedDataset,
          config: TrainConfig) -> TrainResult:
    """Mini-batch training with dev-loss early stopping.

    The model ends up holding, and the result returns, the parameters from
    the evaluation point with the lowest dev loss.
    """
    if len(train_data) == 0 or len(dev_data) == 0:
        raise ConfigError("train and dev splits must be non-empty")
    optimizer = make_optimizer(config.optimizer, config.learning_rate)
    clip = model.clip_norm if config.clip_norm is None else config.clip_norm
    history = TrainHistory()
    best_state, best_loss = None, math.inf
    step, window = 0, []

    def evaluate_now():
        nonlocal best_state, best_loss
        rep = evaluate(model, dev_data, batch_size=max(config.batch_size, 256))
        history.points.append(EvalPoint(step, float(np.mean(window)), rep.loss, rep.accuracy))
        window.clear()
        logger.info("batch %d train %.4f dev %.4f acc %.4f",
                    step, history.points[-1].train_loss, rep.loss, rep.accuracy)
        if rep.loss < best_loss:
            best_loss, best_state = rep.loss, model.state_dict()
            history.best_batch = step
            return False
        return step - history.best_batch >= config.patience_batches

    stop = False
    for epoch in range(config.max_epochs):
        elapsed = 0.0
        started = time.perf_counter()
        for batch in batch_iter(train_data, config.batch_size, shuffle=True,
                                seed=(config.seed, epoch)):
            window.append(train_step(model, batch, optimizer, clip))
            step += 1
            if step % config.eval_interval_batches == 0:
                elapsed += time.perf_counter() - started
                stop = evaluate_now()
                started = time.perf_counter()
                if stop:
                    break
        elapsed += time.perf_counter() - started
        history.epoch_seconds.append(elapsed)
        if stop:
            history.stop_reason = "patience"
            break
    else:
        history.stop_reason = "max_epochs"
    if window:
        evaluate_now()
    model.load_state_dict(best_state)
    return TrainResult(best_state, history)
