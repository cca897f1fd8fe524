from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from textclf.errors import LabelError, UndefinedMetricError
from textclf.metrics import (ConfusionMatrix, MetricsReport, accuracy, f1, precision,
                             precision_with_flag, predict, recall, recall_with_flag,
                             render_comparison, render_csv, render_report)

from reference_tables import PER_CLASS

FIXTURES = Path(__file__).parent / "fixtures"


def toy_report():
    cm = ConfusionMatrix(2, [[3, 1], [0, 2]])
    return MetricsReport.from_confusion(cm, 0.5, ["sports", "game"])


def brute_force(pairs, C):
    """Per-pair counting oracle for accuracy and per-class precision/recall/F1."""
    correct = sum(1 for t, p in pairs if t == p)
    out = {"accuracy": correct / len(pairs), "p": [], "r": [], "f": []}
    for c in range(C):
        tp = sum(1 for t, p in pairs if t == c and p == c)
        fp = sum(1 for t, p in pairs if t != c and p == c)
        fn = sum(1 for t, p in pairs if t == c and p != c)
        prec = tp / (tp + fp) if tp + fp else 0.0
        rec = tp / (tp + fn) if tp + fn else 0.0
        out["p"].append(prec)
        out["r"].append(rec)
        out["f"].append(2 * prec * rec / (prec + rec) if prec + rec else 0.0)
    return out


# ------------------------------------------------------------------ confusion matrix


def test_single_cell_increment():
    cm = ConfusionMatrix(5).update(3, 3)
    assert cm.counts[3, 3] == 1 and cm.total == 1


def test_predict_tie_goes_to_lowest_index():
    assert predict(np.array([[1.0, 1.0, 0.0]])).tolist() == [0]
    assert predict(np.array([[0.0, 2.0, 2.0]])).tolist() == [1]


def test_label_out_of_range():
    with pytest.raises(LabelError):
        ConfusionMatrix(3).update(0, 3)
    with pytest.raises(LabelError):
        ConfusionMatrix(3).update_batch([0, -1], [0, 0])


def test_thousand_random_pairs_match_counting_oracle():
    rng = np.random.default_rng(0)
    t, p = rng.integers(0, 10, 1000), rng.integers(0, 10, 1000)
    cm = ConfusionMatrix(10).update_batch(t, p)
    for i in range(10):
        for j in range(10):
            assert cm.counts[i, j] == sum(1 for a, b in zip(t, p) if a == i and b == j)
    oracle = brute_force(list(zip(t.tolist(), p.tolist())), 10)
    assert accuracy(cm) == oracle["accuracy"]
    assert [precision(cm, c) for c in range(10)] == oracle["p"]
    assert [recall(cm, c) for c in range(10)] == oracle["r"]
    assert [f1(precision(cm, c), recall(cm, c)) for c in range(10)] == oracle["f"]


# ------------------------------------------------------------------ rates


def test_accuracy_cases():
    assert accuracy(ConfusionMatrix(3, np.diag([4, 5, 6]))) == 1.0
    assert accuracy(ConfusionMatrix(2, [[0, 3], [2, 0]])) == 0.0
    with pytest.raises(UndefinedMetricError):
        accuracy(ConfusionMatrix(3))


def test_precision_three_tp_one_fp():
    cm = ConfusionMatrix(2, [[3, 0], [1, 5]])
    assert precision(cm, 0) == 0.75


def test_zero_division_flags():
    cm = ConfusionMatrix(3, [[2, 0, 0], [1, 0, 0], [0, 0, 0]])
    assert precision_with_flag(cm, 1) == (0.0, True)
    assert recall_with_flag(cm, 2) == (0.0, True)
    assert recall_with_flag(cm, 1) == (0.0, False)


def test_f1_cases():
    assert f1(0.9, 0.9) == pytest.approx(0.9)
    assert f1(0.0, 0.0) == 0.0
    assert f1(1.0, 0.0) == 0.0


@pytest.mark.parametrize("arch", sorted(PER_CLASS))
def test_f1_reproduces_reference_tables(arch):
    for name, p, r, expected in PER_CLASS[arch]:
        assert abs(f1(p, r) - expected) <= 5e-4, name


# ------------------------------------------------------------------ rendering


def test_golden_report():
    assert render_report(toy_report()) == (FIXTURES / "toy_report.txt").read_text(encoding="utf-8")


def test_golden_report_zero_division():
    cm = ConfusionMatrix(2, [[2, 0], [1, 0]])
    rep = MetricsReport.from_confusion(cm, 1.25, ["sports", "game"])
    text = render_report(rep)
    assert text == (FIXTURES / "toy_report_zero_div.txt").read_text(encoding="utf-8")
    assert "0.0000*" in text


def test_golden_csv():
    assert render_csv(toy_report()) == (FIXTURES / "toy_report.csv").read_text(encoding="utf-8")


def test_report_averages_rows():
    text = render_report(toy_report(), averages=True)
    lines = {line.split("  ")[0]: line.split() for line in text.splitlines()}
    assert lines["Macro Avg"][-3:] == ["0.8333", "0.8750", "0.8286"]
    # supports 4 and 2: weights 2/3 and 1/3
    assert lines["Weighted Avg"][-3:] == ["0.8889", "0.8333", "0.8381"]


def test_report_alignment_with_long_names():
    rep = MetricsReport.from_confusion(ConfusionMatrix(2, np.eye(2)), 0.1,
                                       ["entertainment", "a"])
    lines = render_report(rep).splitlines()
    col = lines[0].index("Precision")
    assert all(line[col - 2:col] == "  " for line in lines[1:4])
    assert lines[1][col:col + 6] == "1.0000"


def test_comparison_table():
    reps = {"TextCNN": toy_report(), "FastText": toy_report()}
    assert render_comparison(reps).splitlines() == [
        "Model     Loss    Accuracy",
        "TextCNN   0.5000  83.33%",
        "FastText  0.5000  83.33%",
    ]


def test_report_dict_round_trip():
    rep = toy_report()
    assert MetricsReport.from_dict(rep.to_dict()) == rep


# ------------------------------------------------------------------ properties


pairs_strategy = st.lists(st.tuples(st.integers(0, 4), st.integers(0, 4)), min_size=1, max_size=60)


def cm_of(pairs, C=5):
    return ConfusionMatrix(C).update_batch([t for t, _ in pairs], [p for _, p in pairs])


@settings(max_examples=60, deadline=None)
@given(pairs_strategy)
def test_micro_average_consistency(pairs):
    cm = cm_of(pairs)
    tp = sum(int(cm.counts[c, c]) for c in range(5))
    fp = sum(int(cm.counts[:, c].sum() - cm.counts[c, c]) for c in range(5))
    assert tp / (tp + fp) == accuracy(cm)


@settings(max_examples=60, deadline=None)
@given(pairs_strategy, st.permutations(range(5)))
def test_class_permutation_equivariance(pairs, perm):
    cm = cm_of(pairs)
    permuted = cm_of([(perm[t], perm[p]) for t, p in pairs])
    assert accuracy(permuted) == accuracy(cm)
    for c in range(5):
        assert precision(permuted, perm[c]) == precision(cm, c)
        assert recall(permuted, perm[c]) == recall(cm, c)


@settings(max_examples=60, deadline=None)
@given(pairs_strategy)
def test_f1_between_min_and_max(pairs):
    cm = cm_of(pairs)
    for c in range(5):
        p, r = precision(cm, c), recall(cm, c)
        assert min(p, r) - 1e-12 <= f1(p, r) <= max(p, r) + 1e-12
        assert 0.0 <= f1(p, r) <= 1.0


@settings(max_examples=60, deadline=None)
@given(pairs_strategy, pairs_strategy)
def test_merge_equals_concatenation(a, b):
    merged = cm_of(a) + cm_of(b)
    assert np.array_equal(merged.counts, cm_of(a + b).counts)
