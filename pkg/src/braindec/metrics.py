"""Classification metrics, baselines, and multi-seed summaries.

Kept in plain Python (3x3 integer confusion matrices) so metric values are
exactly reproducible. Class order everywhere is (neutral, positive, negative).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from . import stats
from .labels import N_CLASSES, SentimentLabel, argmax_class


@dataclass(frozen=True)
class ConfusionMatrix:
    """Counts[true][predicted] over the three classes."""

    counts: tuple[tuple[int, int, int], ...]

    def __post_init__(self):
        if len(self.counts) != N_CLASSES or any(len(r) != N_CLASSES for r in self.counts):
            raise ValueError("confusion matrix must be 3x3")
        if any(c < 0 for row in self.counts for c in row):
            raise ValueError("confusion matrix counts must be non-negative")

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[int, int]]) -> "ConfusionMatrix":
        counts = [[0] * N_CLASSES for _ in range(N_CLASSES)]
        for true_cls, pred_cls in pairs:
            counts[true_cls][pred_cls] += 1
        return cls(tuple(tuple(row) for row in counts))

    @property
    def total(self) -> int:
        return sum(c for row in self.counts for c in row)


def accuracy(cm: ConfusionMatrix) -> float:
    """Fraction of correct predictions (trace over total)."""
    total = cm.total
    if total == 0:
        raise ValueError("empty confusion matrix")
    return sum(cm.counts[k][k] for k in range(N_CLASSES)) / total


def balanced_accuracy(cm: ConfusionMatrix) -> float:
    """Mean per-class recall over classes that occur in the truth.

    Classes with no true instances are excluded from the mean; use
    absent_true_classes to report how many were excluded.
    """
    recalls = []
    for k in range(N_CLASSES):
        row_total = sum(cm.counts[k])
        if row_total > 0:
            recalls.append(cm.counts[k][k] / row_total)
    if not recalls:
        raise ValueError("empty confusion matrix")
    return sum(recalls) / len(recalls)


def absent_true_classes(cm: ConfusionMatrix) -> int:
    """Number of classes with zero true instances (excluded from balanced accuracy)."""
    return sum(1 for k in range(N_CLASSES) if sum(cm.counts[k]) == 0)


def baselines(train_labels: Sequence[SentimentLabel]) -> tuple[float, float]:
    """(majority-class accuracy baseline, chance balanced-accuracy baseline).

    The accuracy baseline is the proportion of the most common argmax class;
    the balanced-accuracy baseline is 1/3 regardless of class balance.
    """
    if not train_labels:
        raise ValueError("cannot compute baselines from an empty label list")
    counts = [0] * N_CLASSES
    for lab in train_labels:
        counts[argmax_class(lab)] += 1
    return max(counts) / len(train_labels), 1.0 / 3.0


@dataclass(frozen=True)
class MetricSummary:
    """Per-seed mean +- SEM of one metric with a one-sided test against a baseline."""

    mean: float
    sem: float
    t: float
    p: float
    n: int
    baseline: float


@dataclass(frozen=True)
class SeedSummary:
    """Per-seed metric vectors and their summaries for one architecture."""

    accuracy: tuple[float, ...]
    balanced_accuracy: tuple[float, ...]
    accuracy_summary: MetricSummary
    balanced_accuracy_summary: MetricSummary


def summarize(per_seed_values: Sequence[float], baseline: float) -> MetricSummary:
    """Mean, SEM, and one-sided one-sample t-test against the baseline."""
    n = len(per_seed_values)
    if n < 2:
        raise ValueError(f"need at least 2 seed values to summarize, got {n}")
    mean = sum(per_seed_values) / n
    ss = sum((v - mean) ** 2 for v in per_seed_values)
    sem = math.sqrt(ss / (n - 1)) / math.sqrt(n)
    try:
        result = stats.one_sample_t(per_seed_values, baseline, stats.ONE_SIDED_GREATER)
    except stats.StatsError as exc:
        raise ValueError(f"degenerate seed spread: {exc}") from None
    return MetricSummary(mean, sem, result.statistic, result.p_value, n, baseline)


def make_seed_summary(
    accuracies: Sequence[float],
    balanced_accuracies: Sequence[float],
    majority_baseline: float,
    chance_baseline: float = 1.0 / 3.0,
) -> SeedSummary:
    if len(accuracies) != len(balanced_accuracies):
        raise ValueError("per-seed metric vectors must have equal length")
    return SeedSummary(
        tuple(accuracies),
        tuple(balanced_accuracies),
        summarize(accuracies, majority_baseline),
        summarize(balanced_accuracies, chance_baseline),
    )
