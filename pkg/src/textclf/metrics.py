"""Confusion-matrix metrics and plain-text report rendering."""
from __future__ import annotations

import io
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import LabelError, UndefinedMetricError

ZERO_DIV_NOTE = "* zero denominator, rate reported as 0.0000"


def predict(logits) -> np.ndarray:
    """Argmax over the class axis; ties resolve to the lowest class index."""
    return np.argmax(np.asarray(logits), axis=-1)


class ConfusionMatrix:
    """Counts with rows = true class and columns = predicted class."""

    def __init__(self, num_class: int, counts=None):
        self.num_class = num_class
        if counts is None:
            self.counts = np.zeros((num_class, num_class), dtype=np.int64)
        else:
            self.counts = np.array(counts, dtype=np.int64).reshape(num_class, num_class)

    def _check(self, labels):
        labels = np.asarray(labels, dtype=np.int64)
        if labels.size and (labels.min() < 0 or labels.max() >= self.num_class):
            raise LabelError(f"label outside [0, {self.num_class})")
        return labels

    def update(self, true_label: int, predicted_label: int) -> "ConfusionMatrix":
        self._check([true_label, predicted_label])
        self.counts[true_label, predicted_label] += 1
        return self

    def update_batch(self, true_labels, predicted_labels) -> "ConfusionMatrix":
        t = self._check(true_labels).reshape(-1)
        p = self._check(predicted_labels).reshape(-1)
        if t.shape != p.shape:
            raise ValueError("true and predicted label arrays differ in length")
        np.add.at(self.counts, (t, p), 1)
        return self

    def merge(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        if other.num_class != self.num_class:
            raise ValueError("cannot merge confusion matrices of different sizes")
        return ConfusionMatrix(self.num_class, self.counts + other.counts)

    __add__ = merge

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def trace(self) -> int:
        return int(np.trace(self.counts))


def accuracy(cm: ConfusionMatrix) -> float:
    if cm.total == 0:
        raise UndefinedMetricError("accuracy of an empty confusion matrix")
    return cm.trace / cm.total


def _ratio(num, den):
    return (num / den, False) if den else (0.0, True)


def precision_with_flag(cm, c):
    return _ratio(int(cm.counts[c, c]), int(cm.counts[:, c].sum()))


def recall_with_flag(cm, c):
    return _ratio(int(cm.counts[c, c]), int(cm.counts[c, :].sum()))


def precision(cm: ConfusionMatrix, c: int) -> float:
    """TP / (TP + FP); 0.0 when the class was never predicted."""
    return precision_with_flag(cm, c)[0]


def recall(cm: ConfusionMatrix, c: int) -> float:
    """TP / (TP + FN); 0.0 when the class never occurs."""
    return recall_with_flag(cm, c)[0]


def f1(p: float, r: float) -> float:
    return 2 * p * r / (p + r) if p + r > 0 else 0.0


@dataclass
class MetricsReport:
    loss: float
    accuracy: float
    precision: list
    recall: list
    f1: list
    precision_zero_div: list
    recall_zero_div: list
    class_names: list
    confusion: list = field(default_factory=list)

    @classmethod
    def from_confusion(cls, cm: ConfusionMatrix, loss: float, class_names=None):
        C = cm.num_class
        names = list(class_names) if class_names is not None else [str(c) for c in range(C)]
        if len(names) != C:
            raise ValueError(f"{len(names)} class names for {C} classes")
        ps = [precision_with_flag(cm, c) for c in range(C)]
        rs = [recall_with_flag(cm, c) for c in range(C)]
        return cls(
            loss=float(loss),
            accuracy=accuracy(cm),
            precision=[p for p, _ in ps],
            recall=[r for r, _ in rs],
            f1=[f1(p, r) for (p, _), (r, _) in zip(ps, rs)],
            precision_zero_div=[flag for _, flag in ps],
            recall_zero_div=[flag for _, flag in rs],
            class_names=names,
            confusion=cm.counts.tolist(),
        )

    @property
    def f1_zero_div(self):
        return [p + r == 0 for p, r in zip(self.precision, self.recall)]

    def confusion_matrix(self) -> ConfusionMatrix:
        return ConfusionMatrix(len(self.class_names), self.confusion)

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


def _cell(value, flagged):
    return f"{value:.4f}" + ("*" if flagged else "")


def render_report(report: MetricsReport, class_names=None, averages: bool = False) -> str:
    """Aligned plain-text table: one row per class, then Overall Accuracy and Loss."""
    names = list(class_names) if class_names is not None else report.class_names
    rows = []
    for c, name in enumerate(names):
        rows.append((name,
                     _cell(report.precision[c], report.precision_zero_div[c]),
                     _cell(report.recall[c], report.recall_zero_div[c]),
                     _cell(report.f1[c], report.f1_zero_div[c])))
    if averages:
        support = np.asarray(report.confusion).sum(axis=1)
        weights = support / support.sum()
        for label, w in (("Macro Avg", None), ("Weighted Avg", weights)):
            rows.append((label,) + tuple(
                f"{np.average(vals, weights=w):.4f}"
                for vals in (report.precision, report.recall, report.f1)))
    rows.append(("Overall Accuracy", f"{report.accuracy:.4f}", "-", "-"))
    width = max(len(r[0]) for r in rows + [("Category",)]) + 2
    lines = [f"{'Category':<{width}}{'Precision':<11}{'Recall':<11}F1-Score"]
    for name, p, r, f in rows:
        lines.append(f"{name:<{width}}{p:<11}{r:<11}{f}")
    lines.append(f"{'Loss':<{width}}{report.loss:.4f}")
    flags = report.precision_zero_div + report.recall_zero_div + report.f1_zero_div
    if any(flags):
        lines.append(ZERO_DIV_NOTE)
    return "\n".join(lines) + "\n"


def render_csv(report: MetricsReport, class_names=None) -> str:
    names = list(class_names) if class_names is not None else report.class_names
    out = io.StringIO()
    out.write("category,precision,recall,f1_score,zero_division\n")
    for c, name in enumerate(names):
        flags = [label for label, flag in (("precision", report.precision_zero_div[c]),
                                           ("recall", report.recall_zero_div[c]),
                                           ("f1_score", report.f1_zero_div[c])) if flag]
        out.write(f"{name},{report.precision[c]:.6f},{report.recall[c]:.6f},"
                  f"{report.f1[c]:.6f},{';'.join(flags)}\n")
    out.write(f"overall_accuracy,{report.accuracy:.6f},,,\n")
    out.write(f"loss,{report.loss:.6f},,,\n")
    return out.getvalue()


def render_comparison(reports: dict) -> str:
    """Loss/accuracy table across models, ordered as given."""
    width = max([len("Model")] + [len(n) for n in reports]) + 2
    lines = [f"{'Model':<{width}}{'Loss':<8}Accuracy"]
    for name, rep in reports.items():
        lines.append(f"{name:<{width}}{rep.loss:<8.4f}{100 * rep.accuracy:.2f}%")
    return "\n".join(lines) + "\n"
