"""Multi-seed experiment orchestration and report files.

For each seed: split, standardize, train every requested architecture,
evaluate on the held-out test split. Per-seed metric rows then roll up into
summary rows (mean, SEM, one-sided one-sample t against the baseline) plus a
posthoc two-sample comparison between architectures on balanced accuracy.

Output files (all written atomically, full float precision):
    metrics.csv    seed,architecture,accuracy,balanced_accuracy
    summary.csv    architecture,metric,mean,sem,t,p,baseline
    plot_data.csv  architecture,metric,seed,value,baseline (raincloud input)
    loss_<arch>_seed<seed>.csv  per-epoch loss curves

Jobs (seed x architecture) run under a configurable worker cap; results merge
in a fixed order so outputs are byte-identical regardless of scheduling.
"""

from __future__ import annotations

import csv
import io
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import yaml

from .epochs import (
    DEFAULT_FRACTIONS,
    TEST,
    Epoch,
    extract_epochs,
    read_recording,
    split_dataset,
    standardize,
)
from .events import parse_events, segment_phrases
from .labels import argmax_class, parse_labels
from .metrics import (
    ConfusionMatrix,
    MetricSummary,
    accuracy,
    balanced_accuracy,
    baselines,
    summarize,
)
from .models import TrainConfig, predict, train, write_loss_curves
from .models.train import ARCHITECTURES
from .stats import StatsError, TestResult, two_sample_t_summary
from .synth import SynthConfig, generate

log = logging.getLogger(__name__)

ACCURACY = "accuracy"
BALANCED_ACCURACY = "balanced_accuracy"
METRICS_HEADER = ("seed", "architecture", "accuracy", "balanced_accuracy")
SUMMARY_HEADER = ("architecture", "metric", "mean", "sem", "t", "p", "baseline")
PLOT_HEADER = ("architecture", "metric", "seed", "value", "baseline")
POSTHOC_NAME = "mlp_vs_lstm"


@dataclass
class ExperimentConfig:
    out_dir: Path
    events_path: Path | None = None
    labels_path: Path | None = None
    recording_path: Path | None = None
    synth: SynthConfig | None = None
    window_seconds: float = 2.0
    min_pause_seconds: float = 0.0
    fractions: tuple[float, float, float] = DEFAULT_FRACTIONS
    seeds: tuple[int, ...] = tuple(range(10))
    architectures: tuple[str, ...] = ARCHITECTURES
    train: TrainConfig = field(default_factory=TrainConfig)
    workers: int = 1

    def __post_init__(self):
        self.out_dir = Path(self.out_dir)
        if not self.seeds:
            raise ValueError("at least one seed is required")
        if not self.architectures:
            raise ValueError("at least one architecture is required")
        for arch in self.architectures:
            if arch not in ARCHITECTURES:
                raise ValueError(f"unknown architecture {arch!r}")
        if abs(sum(self.fractions) - 1.0) > 1e-9:
            raise ValueError(f"split fractions sum to {sum(self.fractions)!r}, expected 1")
        have_files = all(p is not None for p in
                         (self.events_path, self.labels_path, self.recording_path))
        if self.synth is None and not have_files:
            raise ValueError("either a synth section or all three data paths are required")
        if self.window_seconds <= 0:
            raise ValueError("window_seconds must be positive")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")


@dataclass
class SeedMetrics:
    seed: int
    architecture: str
    accuracy: float
    balanced_accuracy: float


@dataclass
class SummaryRow:
    architecture: str
    metric: str
    mean: float
    sem: float
    t: float
    p: float
    baseline: float | None


def _as_tuple(value, n: int, name: str) -> tuple:
    seq = tuple(value)
    if len(seq) != n:
        raise ValueError(f"{name} must have {n} entries, got {len(seq)}")
    return seq


def config_from_dict(raw: dict, out_dir=None) -> ExperimentConfig:
    """Build an ExperimentConfig from a parsed config mapping.

    Unknown keys are errors (they are usually typos). ``seeds`` may be a list
    or a count n meaning seeds 0..n-1.
    """
    raw = dict(raw or {})
    kwargs: dict = {}

    data = raw.pop("data", None)
    if data is not None:
        unknown = set(data) - {"events", "labels", "recording"}
        if unknown:
            raise ValueError(f"unknown data keys {sorted(unknown)}")
        kwargs["events_path"] = Path(data["events"])
        kwargs["labels_path"] = Path(data["labels"])
        kwargs["recording_path"] = Path(data["recording"])

    synth_raw = raw.pop("synth", None)
    if synth_raw is not None:
        synth_kwargs = dict(synth_raw)
        if "class_priors" in synth_kwargs:
            synth_kwargs["class_priors"] = _as_tuple(
                synth_kwargs["class_priors"], 3, "class_priors")
        if "words_per_phrase" in synth_kwargs:
            synth_kwargs["words_per_phrase"] = _as_tuple(
                synth_kwargs["words_per_phrase"], 2, "words_per_phrase")
        kwargs["synth"] = SynthConfig(**synth_kwargs)

    train_raw = raw.pop("train", None)
    if train_raw is not None:
        kwargs["train"] = TrainConfig(**dict(train_raw))

    seeds = raw.pop("seeds", None)
    if seeds is not None:
        kwargs["seeds"] = (tuple(range(int(seeds))) if isinstance(seeds, int)
                           else tuple(int(s) for s in seeds))
    if "architectures" in raw:
        kwargs["architectures"] = tuple(raw.pop("architectures"))
    if "fractions" in raw:
        kwargs["fractions"] = tuple(
            float(f) for f in _as_tuple(raw.pop("fractions"), 3, "fractions"))
    for key in ("window_seconds", "min_pause_seconds"):
        if key in raw:
            kwargs[key] = float(raw.pop(key))
    if "workers" in raw:
        kwargs["workers"] = int(raw.pop("workers"))

    cfg_out = raw.pop("out_dir", None)
    if out_dir is None and cfg_out is None:
        raise ValueError("an output directory is required (out_dir)")
    kwargs["out_dir"] = Path(out_dir if out_dir is not None else cfg_out)

    if raw:
        raise ValueError(f"unknown config keys {sorted(raw)}")
    return ExperimentConfig(**kwargs)


def load_config(path, out_dir=None) -> ExperimentConfig:
    """Parse a YAML experiment config file."""
    with open(path) as fh:
        raw = yaml.safe_load(fh)
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ValueError(f"config root must be a mapping, got {type(raw).__name__}")
    return config_from_dict(raw, out_dir=out_dir)


def atomic_write_text(path, text: str) -> None:
    """Write-then-rename so readers never observe partial files."""
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def load_epochs(cfg: ExperimentConfig) -> list[Epoch]:
    """Parse the corpus files (generating them first if a synth config is set)."""
    if cfg.synth is not None:
        paths = generate(cfg.synth, cfg.out_dir / "data")
        events_path, labels_path, recording_path = (
            paths.events, paths.labels, paths.recording)
    else:
        events_path, labels_path, recording_path = (
            cfg.events_path, cfg.labels_path, cfg.recording_path)
    with open(events_path) as fh:
        events = parse_events(fh)
    phrases = segment_phrases(events, cfg.min_pause_seconds)
    with open(labels_path) as fh:
        labels = parse_labels(fh)
    with open(recording_path, "rb") as fh:
        rec = read_recording(fh)
    epochs, skipped = extract_epochs(rec, phrases, labels, cfg.window_seconds)
    if skipped:
        log.warning("skipped %d phrases that overrun the recording", skipped)
    return epochs


def _run_job(epochs: list[Epoch], cfg: ExperimentConfig, seed: int,
             arch: str) -> tuple[SeedMetrics, object]:
    ds = split_dataset(epochs, cfg.fractions, seed)
    ds = standardize(ds)
    tc = replace(cfg.train, arch=arch, seed=seed)
    result = train(ds, tc)
    test_eps = ds.split_epochs(TEST)
    preds = predict(result.best_params, test_eps)
    pairs = [(argmax_class(ep.label.probs), pred_class)
             for ep, (_, pred_class) in zip(test_eps, preds)]
    cm = ConfusionMatrix.from_pairs(pairs)
    metrics = SeedMetrics(seed, arch, accuracy(cm), balanced_accuracy(cm))
    log.info("seed %d %s: accuracy %.4f, balanced accuracy %.4f",
             seed, arch, metrics.accuracy, metrics.balanced_accuracy)
    return metrics, result


def posthoc_row(mean1: float, sem1: float, n1: int,
                mean2: float, sem2: float, n2: int) -> SummaryRow:
    """Two-sample comparison row between architectures (balanced accuracy)."""
    res: TestResult = two_sample_t_summary(mean1, sem1, n1, mean2, sem2, n2)
    sem_diff = (sem1 ** 2 + sem2 ** 2) ** 0.5
    return SummaryRow(POSTHOC_NAME, BALANCED_ACCURACY, mean1 - mean2, sem_diff,
                      res.statistic, res.p_value, None)


def _summarize_tolerant(values: list[float], baseline: float) -> MetricSummary:
    """Like metrics.summarize, but a zero seed spread yields NaN t and p.

    Perfect recovery on every seed is a legitimate experiment outcome, not a
    reason to abort; the undefined test statistic is reported as NaN.
    """
    try:
        return summarize(values, baseline)
    except ValueError as exc:
        if "degenerate seed spread" not in str(exc):
            raise
        n = len(values)
        log.warning("identical metric values across %d seeds: t-test undefined", n)
        return MetricSummary(sum(values) / n, 0.0, float("nan"), float("nan"),
                             n, baseline)


def summarize_metrics(rows: list[SeedMetrics], architectures: tuple[str, ...],
                      majority_baseline: float) -> list[SummaryRow]:
    """Summary rows per architecture and metric, plus the posthoc comparison."""
    out = []
    per_arch: dict[str, MetricSummary] = {}
    for arch in architectures:
        arch_rows = [r for r in rows if r.architecture == arch]
        acc = _summarize_tolerant([r.accuracy for r in arch_rows], majority_baseline)
        bal = _summarize_tolerant([r.balanced_accuracy for r in arch_rows], 1.0 / 3.0)
        out.append(SummaryRow(arch, ACCURACY, acc.mean, acc.sem, acc.t, acc.p,
                              majority_baseline))
        out.append(SummaryRow(arch, BALANCED_ACCURACY, bal.mean, bal.sem, bal.t,
                              bal.p, 1.0 / 3.0))
        per_arch[arch] = bal
    if len(architectures) == 2:
        a, b = (per_arch[arch] for arch in architectures)
        try:
            out.append(posthoc_row(a.mean, a.sem, a.n, b.mean, b.sem, b.n))
        except StatsError:
            log.warning("posthoc comparison undefined (zero spread in a group)")
            out.append(SummaryRow(POSTHOC_NAME, BALANCED_ACCURACY, a.mean - b.mean,
                                  (a.sem ** 2 + b.sem ** 2) ** 0.5,
                                  float("nan"), float("nan"), None))
    return out


def format_metrics_csv(rows: list[SeedMetrics]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(METRICS_HEADER)
    for r in rows:
        writer.writerow([r.seed, r.architecture, repr(r.accuracy),
                         repr(r.balanced_accuracy)])
    return buf.getvalue()


def parse_metrics_csv(path) -> list[SeedMetrics]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != list(METRICS_HEADER):
            raise ValueError(f"bad metrics header {header!r}")
        return [SeedMetrics(int(r[0]), r[1], float(r[2]), float(r[3]))
                for r in reader]


def format_summary_csv(rows: list[SummaryRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(SUMMARY_HEADER)
    for r in rows:
        writer.writerow([r.architecture, r.metric, repr(r.mean), repr(r.sem),
                         repr(r.t), repr(r.p),
                         "" if r.baseline is None else repr(r.baseline)])
    return buf.getvalue()


def parse_summary_csv(path) -> list[SummaryRow]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != list(SUMMARY_HEADER):
            raise ValueError(f"bad summary header {header!r}")
        return [SummaryRow(r[0], r[1], float(r[2]), float(r[3]), float(r[4]),
                           float(r[5]), float(r[6]) if r[6] else None)
                for r in reader]


def format_plot_csv(rows: list[SeedMetrics], majority_baseline: float) -> str:
    """Per-seed values with the baseline attached, for raincloud-style plots."""
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(PLOT_HEADER)
    for r in rows:
        writer.writerow([r.architecture, ACCURACY, r.seed, repr(r.accuracy),
                         repr(majority_baseline)])
    for r in rows:
        writer.writerow([r.architecture, BALANCED_ACCURACY, r.seed,
                         repr(r.balanced_accuracy), repr(1.0 / 3.0)])
    return buf.getvalue()


def run_experiment(cfg: ExperimentConfig) -> list[SummaryRow]:
    """Run all seed x architecture jobs and write the report files."""
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    epochs = load_epochs(cfg)
    majority, _ = baselines([ep.label for ep in epochs])

    jobs = [(seed, arch) for seed in cfg.seeds for arch in cfg.architectures]
    if cfg.workers == 1:
        outcomes = [_run_job(epochs, cfg, seed, arch) for seed, arch in jobs]
    else:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            futures = [pool.submit(_run_job, epochs, cfg, seed, arch)
                       for seed, arch in jobs]
            outcomes = [f.result() for f in futures]

    rows = []
    for (seed, arch), (metrics, result) in zip(jobs, outcomes):
        rows.append(metrics)
        write_loss_curves(cfg.out_dir / f"loss_{arch}_seed{seed}.csv", result)

    atomic_write_text(cfg.out_dir / "metrics.csv", format_metrics_csv(rows))
    atomic_write_text(cfg.out_dir / "plot_data.csv",
                      format_plot_csv(rows, majority))
    if len(cfg.seeds) < 2:
        log.warning("single-seed run: summary statistics need at least 2 seeds")
        return []
    summary = summarize_metrics(rows, cfg.architectures, majority)
    atomic_write_text(cfg.out_dir / "summary.csv", format_summary_csv(summary))
    return summary


def format_report(summary: list[SummaryRow]) -> str:
    """Markdown report: one decoding-results table plus the posthoc line."""
    lines = ["# Decoding results", ""]
    lines.append("| Architecture | Metric | Mean ± SEM | t | p | Baseline |")
    lines.append("| --- | --- | --- | --- | --- | --- |")
    posthoc = None
    for r in summary:
        if r.architecture == POSTHOC_NAME:
            posthoc = r
            continue
        base = "" if r.baseline is None else f"{r.baseline:.3f}"
        lines.append(
            f"| {r.architecture} | {r.metric} | {r.mean:.3f} ± {r.sem:.3f} "
            f"| {r.t:.3f} | {r.p:.3f} | {base} |")
    lines.append("")
    if posthoc is not None:
        lines.append(
            f"Posthoc {posthoc.architecture} on {posthoc.metric}: "
            f"difference {posthoc.mean:.3f} ± {posthoc.sem:.3f}, "
            f"t = {posthoc.t:.3f}, p = {posthoc.p:.3f}.")
        lines.append("")
    return "\n".join(lines)


def write_report(out_dir) -> Path:
    """Aggregate an experiment directory's summary CSV into report.md."""
    out_dir = Path(out_dir)
    summary_path = out_dir / "summary.csv"
    if not summary_path.exists():
        raise FileNotFoundError(f"no metrics found in {out_dir}")
    summary = parse_summary_csv(summary_path)
    report = format_report(summary)
    path = out_dir / "report.md"
    atomic_write_text(path, report)
    return path
