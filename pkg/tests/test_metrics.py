"""Metric oracles, baselines, and seed summaries."""

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from braindec.metrics import (
    ConfusionMatrix,
    absent_true_classes,
    accuracy,
    balanced_accuracy,
    baselines,
    make_seed_summary,
    summarize,
)

from conftest import make_label

cm_counts = st.tuples(*[st.tuples(*[st.integers(0, 30)] * 3)] * 3)


def brute_force_balanced(counts):
    recalls = [row[k] / sum(row) for k, row in enumerate(counts) if sum(row) > 0]
    return sum(recalls) / len(recalls)


# ---------------------------------------------------------------- accuracy

def test_accuracy_diagonal():
    cm = ConfusionMatrix(((4, 0, 0), (0, 7, 0), (0, 0, 2)))
    assert accuracy(cm) == 1.0


def test_accuracy_hand_count():
    cm = ConfusionMatrix(((8, 1, 1), (2, 0, 0), (1, 0, 0)))
    assert abs(accuracy(cm) - 8 / 13) < 1e-12


def test_accuracy_majority_predictor_on_85pct_truth():
    # 100 epochs, 85 neutral, all predicted neutral
    cm = ConfusionMatrix(((85, 0, 0), (8, 0, 0), (7, 0, 0)))
    assert accuracy(cm) == 0.85


def test_accuracy_empty_errors():
    with pytest.raises(ValueError, match="empty"):
        accuracy(ConfusionMatrix(((0, 0, 0),) * 3))


# ---------------------------------------------------------------- balanced accuracy

def test_balanced_perfect_on_any_mix():
    cm = ConfusionMatrix(((40, 0, 0), (0, 3, 0), (0, 0, 9)))
    assert balanced_accuracy(cm) == 1.0


def test_balanced_always_majority_is_one_third():
    cm = ConfusionMatrix(((85, 0, 0), (8, 0, 0), (7, 0, 0)))
    assert abs(balanced_accuracy(cm) - 1 / 3) <= 1e-12


def test_balanced_hand_count():
    cm = ConfusionMatrix(((5, 0, 0), (1, 1, 0), (0, 0, 2)))
    assert abs(balanced_accuracy(cm) - (1 + 0.5 + 1) / 3) < 1e-12


def test_balanced_excludes_absent_classes():
    cm = ConfusionMatrix(((6, 2, 0), (0, 0, 0), (1, 0, 3)))
    assert absent_true_classes(cm) == 1
    assert abs(balanced_accuracy(cm) - (6 / 8 + 3 / 4) / 2) < 1e-12


def test_balanced_majority_with_two_classes_present():
    cm = ConfusionMatrix(((9, 0, 0), (0, 0, 0), (4, 0, 0)))
    assert abs(balanced_accuracy(cm) - 0.5) < 1e-12  # 1/(classes present)


@given(cm_counts)
def test_balanced_matches_brute_force(counts):
    cm = ConfusionMatrix(counts)
    if all(sum(row) == 0 for row in counts):
        with pytest.raises(ValueError):
            balanced_accuracy(cm)
        return
    assert balanced_accuracy(cm) == brute_force_balanced(counts)
    assert 0.0 <= balanced_accuracy(cm) <= 1.0
    if cm.total:
        assert 0.0 <= accuracy(cm) <= 1.0


def test_fifty_random_matrices_exact(rng_np):
    for _ in range(50):
        counts = tuple(tuple(int(v) for v in row)
                       for row in rng_np.integers(0, 40, size=(3, 3)))
        if all(sum(row) == 0 for row in counts):
            continue
        assert balanced_accuracy(ConfusionMatrix(counts)) == brute_force_balanced(counts)


def test_metrics_invariant_under_class_permutation(rng_np):
    counts = rng_np.integers(1, 20, size=(3, 3))
    cm = ConfusionMatrix(tuple(tuple(int(v) for v in row) for row in counts))
    for perm in ((1, 2, 0), (2, 0, 1), (0, 2, 1)):
        permuted = counts[np.ix_(perm, perm)]
        pcm = ConfusionMatrix(tuple(tuple(int(v) for v in row) for row in permuted))
        assert abs(accuracy(cm) - accuracy(pcm)) < 1e-12
        assert abs(balanced_accuracy(cm) - balanced_accuracy(pcm)) < 1e-12


def test_balanced_equals_accuracy_on_balanced_truth(rng_np):
    for _ in range(20):
        rows = rng_np.integers(0, 7, size=(3, 2))  # off-diagonals fit in the row total
        counts = []
        for k in range(3):
            row = [0, 0, 0]
            others = [c for c in range(3) if c != k]
            row[others[0]], row[others[1]] = int(rows[k][0]), int(rows[k][1])
            row[k] = 12 - row[others[0]] - row[others[1]]  # row total fixed at 12
            counts.append(tuple(row))
        cm = ConfusionMatrix(tuple(counts))
        assert abs(accuracy(cm) - balanced_accuracy(cm)) < 1e-12


def test_from_pairs_counts():
    cm = ConfusionMatrix.from_pairs([(0, 0), (0, 1), (2, 2), (2, 2), (1, 0)])
    assert cm.counts == ((1, 1, 0), (1, 0, 0), (0, 0, 2))
    assert cm.total == 5


def test_matrix_validation():
    with pytest.raises(ValueError, match="3x3"):
        ConfusionMatrix(((1, 2), (3, 4)))
    with pytest.raises(ValueError, match="non-negative"):
        ConfusionMatrix(((1, 0, 0), (0, -1, 0), (0, 0, 1)))


# ---------------------------------------------------------------- baselines

def test_baselines_uniform_and_degenerate():
    labs = [make_label(i, i % 3) for i in range(9)]
    maj, chance = baselines(labs)
    assert abs(maj - 1 / 3) < 1e-12
    assert chance == 1 / 3

    all_neutral = [make_label(i, 0) for i in range(5)]
    assert baselines(all_neutral) == (1.0, 1 / 3)


def test_baselines_majority_proportion():
    labs = [make_label(i, 0) for i in range(17)] + [make_label(17, 1), make_label(18, 2), make_label(19, 2)]
    maj, _ = baselines(labs)
    assert maj == 17 / 20


def test_baselines_empty_errors():
    with pytest.raises(ValueError, match="empty"):
        baselines([])


# ---------------------------------------------------------------- summaries

def test_summarize_formula():
    baseline = 0.4
    spread = [0.02, -0.02, 0.01, -0.01, 0.03, -0.03, 0.015, -0.015, 0.005, -0.005]
    values = [baseline + 1 + d for d in spread]  # mean exactly baseline + 1
    summary = summarize(values, baseline)
    n = len(values)
    sd = math.sqrt(sum(d * d for d in spread) / (n - 1))
    sem = sd / math.sqrt(n)
    assert abs(summary.mean - (baseline + 1)) < 1e-12
    assert abs(summary.sem - sem) < 1e-12
    assert abs(summary.t - 1 / sem) < 1e-9
    assert summary.n == n and summary.baseline == baseline


def test_summarize_degenerate_spread():
    with pytest.raises(ValueError, match="degenerate seed spread"):
        summarize([0.5] * 10, 1 / 3)


def test_summarize_too_few_values():
    with pytest.raises(ValueError, match="at least 2"):
        summarize([0.5], 1 / 3)


def test_summarize_paper_shaped():
    mean, sem = 35.878, 0.335
    d = 3.0 * sem
    values = [mean + d] * 5 + [mean - d] * 5
    summary = summarize(values, 33.333)
    assert abs(summary.t - 7.597) < 1e-2


def test_make_seed_summary_shapes():
    acc = [0.80, 0.82, 0.78, 0.85]
    bal = [0.55, 0.60, 0.52, 0.58]
    seed_summary = make_seed_summary(acc, bal, majority_baseline=0.85)
    assert seed_summary.accuracy == tuple(acc)
    assert seed_summary.balanced_accuracy_summary.baseline == 1 / 3
    with pytest.raises(ValueError, match="equal length"):
        make_seed_summary(acc, bal[:-1], 0.85)
