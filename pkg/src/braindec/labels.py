"""Soft sentiment labels: parsing, validation, and model-agreement analyses.

A label is a probability triple (neutral, positive, negative) per phrase.
The label file is tab-separated with header
``phrase_id\tp_neutral\tp_positive\tp_negative``; the human-annotation file
carries integer counts with header ``phrase_id\tn_neutral\tn_positive\tn_negative``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, TextIO

from .events import FormatError
from .stats import StatsError, TestResult, spearman

log = logging.getLogger(__name__)

LABELS_HEADER = "phrase_id\tp_neutral\tp_positive\tp_negative"
ANNOTATIONS_HEADER = "phrase_id\tn_neutral\tn_positive\tn_negative"

NEUTRAL, POSITIVE, NEGATIVE = 0, 1, 2
CLASS_NAMES = ("neutral", "positive", "negative")
N_CLASSES = 3

# Rows whose probability sum is off by more than this are corrupt; smaller
# deviations (rounded model outputs) are renormalized with a warning.
RENORMALIZE_TOLERANCE = 1e-3
_EXACT_SUM_TOLERANCE = 1e-9


@dataclass(frozen=True)
class SentimentLabel:
    """Per-phrase probability triple in class order (neutral, positive, negative)."""

    phrase_id: int
    p_neutral: float
    p_positive: float
    p_negative: float

    def __post_init__(self):
        for name, p in zip(CLASS_NAMES, self.probs):
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"p_{name}={p} outside [0, 1] for phrase {self.phrase_id}")
        total = sum(self.probs)
        if abs(total - 1.0) > 1e-6:
            raise ValueError(f"probability sum {total} != 1 for phrase {self.phrase_id}")

    @property
    def probs(self) -> tuple[float, float, float]:
        return (self.p_neutral, self.p_positive, self.p_negative)


@dataclass(frozen=True)
class HumanAnnotation:
    """Annotator vote counts per phrase, same class order as SentimentLabel."""

    phrase_id: int
    count_neutral: int
    count_positive: int
    count_negative: int

    def __post_init__(self):
        counts = self.counts
        if any(c < 0 for c in counts):
            raise ValueError(f"negative count for phrase {self.phrase_id}")
        if sum(counts) < 1:
            raise ValueError(f"no annotations for phrase {self.phrase_id}")

    @property
    def counts(self) -> tuple[int, int, int]:
        return (self.count_neutral, self.count_positive, self.count_negative)


@dataclass(frozen=True)
class ClassProportions:
    """Percentages of phrases whose argmax label is each class (sums to 100)."""

    pct_neutral: float
    pct_positive: float
    pct_negative: float

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.pct_neutral, self.pct_positive, self.pct_negative)


@dataclass(frozen=True)
class HumanAgreement:
    """Spearman agreement between model probabilities and annotator counts."""

    rho_avg: float
    p_avg: float
    per_class: tuple[TestResult, TestResult, TestResult]


def parse_labels(source: Iterable[str]) -> list[SentimentLabel]:
    """Parse and validate a label file.

    Rows whose probabilities sum to 1 within RENORMALIZE_TOLERANCE are
    renormalized (with a logged warning); larger deviations, out-of-range
    probabilities, and duplicate phrase ids are errors.
    """
    lines = iter(source)
    try:
        header = next(lines).rstrip("\n")
    except StopIteration:
        raise FormatError("empty label file: missing header") from None
    if header != LABELS_HEADER:
        raise FormatError(f"bad label header {header!r}, expected {LABELS_HEADER!r}")

    labels: list[SentimentLabel] = []
    seen: set[int] = set()
    renormalized = 0
    for line_no, line in enumerate(lines, start=2):
        line = line.rstrip("\n")
        if not line:
            continue
        cols = line.split("\t")
        if len(cols) != 4:
            raise FormatError(f"expected 4 columns, found {len(cols)} at line {line_no}")
        try:
            pid = int(cols[0])
            probs = [float(c) for c in cols[1:]]
        except ValueError:
            raise FormatError(f"unparsable row at line {line_no}: {line!r}") from None
        if pid in seen:
            raise FormatError(f"duplicate phrase_id {pid} at line {line_no}")
        seen.add(pid)
        for p in probs:
            if not 0.0 <= p <= 1.0:
                raise FormatError(f"probability {p} outside [0, 1] at line {line_no}")
        total = sum(probs)
        if abs(total - 1.0) > RENORMALIZE_TOLERANCE:
            raise FormatError(
                f"probability sum {total:g} exceeds tolerance at line {line_no}"
            )
        if abs(total - 1.0) > _EXACT_SUM_TOLERANCE:
            probs = [p / total for p in probs]
            renormalized += 1
            log.warning("renormalized label row at line %d (sum %.6f)", line_no, total)
        labels.append(SentimentLabel(pid, *probs))
    if renormalized:
        log.warning("renormalized %d label row(s)", renormalized)
    return labels


def write_labels(labels: Iterable[SentimentLabel], out: TextIO) -> None:
    out.write(LABELS_HEADER + "\n")
    for lab in labels:
        out.write(f"{lab.phrase_id}\t{lab.p_neutral:.6f}\t{lab.p_positive:.6f}"
                  f"\t{lab.p_negative:.6f}\n")


def parse_annotations(source: Iterable[str]) -> list[HumanAnnotation]:
    """Parse a human-annotation counts file."""
    lines = iter(source)
    try:
        header = next(lines).rstrip("\n")
    except StopIteration:
        raise FormatError("empty annotation file: missing header") from None
    if header != ANNOTATIONS_HEADER:
        raise FormatError(f"bad annotation header {header!r}, expected {ANNOTATIONS_HEADER!r}")
    annotations = []
    seen: set[int] = set()
    for line_no, line in enumerate(lines, start=2):
        line = line.rstrip("\n")
        if not line:
            continue
        cols = line.split("\t")
        if len(cols) != 4:
            raise FormatError(f"expected 4 columns, found {len(cols)} at line {line_no}")
        try:
            values = [int(c) for c in cols]
        except ValueError:
            raise FormatError(f"unparsable row at line {line_no}: {line!r}") from None
        if values[0] in seen:
            raise FormatError(f"duplicate phrase_id {values[0]} at line {line_no}")
        seen.add(values[0])
        try:
            annotations.append(HumanAnnotation(*values))
        except ValueError as exc:
            raise FormatError(f"line {line_no}: {exc}") from None
    return annotations


def argmax_class(label) -> int:
    """Class with maximal probability; ties break neutral > positive > negative.

    Accepts a SentimentLabel or a bare probability triple.
    """
    probs = label.probs if isinstance(label, SentimentLabel) else tuple(label)
    best = NEUTRAL
    for cls in (POSITIVE, NEGATIVE):
        if probs[cls] > probs[best]:
            best = cls
    return best


def class_proportions(labels: list[SentimentLabel]) -> ClassProportions:
    """Percentage of labels whose argmax falls in each class."""
    if not labels:
        raise ValueError("cannot compute class proportions of an empty label list")
    counts = [0, 0, 0]
    for lab in labels:
        counts[argmax_class(lab)] += 1
    return ClassProportions(*(100.0 * c / len(labels) for c in counts))


def compare_with_humans(
    model_labels: list[SentimentLabel], annotations: list[HumanAnnotation]
) -> HumanAgreement:
    """Per-class Spearman correlation of model probabilities vs annotator counts.

    The overall score averages rho (and p) across the three classes.
    """
    model_by_id = {lab.phrase_id: lab for lab in model_labels}
    human_by_id = {ann.phrase_id: ann for ann in annotations}
    if set(model_by_id) != set(human_by_id):
        only_model = sorted(set(model_by_id) - set(human_by_id))[:5]
        only_human = sorted(set(human_by_id) - set(model_by_id))[:5]
        raise ValueError(
            f"phrase_id sets differ (model-only {only_model}, annotation-only {only_human})"
        )
    ids = sorted(model_by_id)
    if len(ids) < 4:
        raise ValueError(f"need at least 4 shared phrases, got {len(ids)}")

    results = []
    for cls in (NEUTRAL, POSITIVE, NEGATIVE):
        probs = [model_by_id[i].probs[cls] for i in ids]
        counts = [float(human_by_id[i].counts[cls]) for i in ids]
        try:
            results.append(spearman(probs, counts))
        except StatsError as exc:
            raise ValueError(f"class {CLASS_NAMES[cls]}: {exc}") from None
    rho_avg = sum(r.statistic for r in results) / N_CLASSES
    p_avg = sum(r.p_value for r in results) / N_CLASSES
    return HumanAgreement(rho_avg, p_avg, tuple(results))
