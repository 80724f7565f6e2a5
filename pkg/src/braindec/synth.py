"""Synthetic corpus generator with a controllable class-conditioned signal.

Produces a matched set of files (events, soft labels, recording, ground-truth
classes) where each phrase occupies its own time slot, separated from the
next by a pause event. Class k injects a sinusoid of frequency 4/10/20 Hz
into a fixed quarter-of-channels block during the phrase window, scaled by
``snr`` on top of unit-variance Gaussian noise, so a decoder (or a matched
filter) can recover the class exactly when snr is high and nothing at all
when snr is zero.

Determinism: a master stream seeds three independent sub-streams (classes,
words, noise) so the noise realization carries no information about class
assignments and fixtures are bit-reproducible.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .epochs import Recording, write_recording
from .events import WORD, PAUSE, Event, segment_phrases, write_events
from .labels import CLASS_NAMES, SentimentLabel, write_labels
from .rng import SplitMix64

log = logging.getLogger(__name__)

CLASS_FREQUENCIES_HZ = (4.0, 10.0, 20.0)
PEAK_PROBABILITY = 0.8
PHRASE_GAP_S = 0.5
GROUND_TRUTH_HEADER = ("phrase_id", "true_class")

_VOCAB = (
    "amber", "basalt", "brook", "cedar", "cliff", "cloud", "coral", "delta",
    "ember", "fern", "flint", "gale", "grove", "harbor", "heath", "juniper",
    "kelp", "larch", "lichen", "marsh", "mesa", "moss", "onyx", "pebble",
    "quartz", "reed", "ridge", "shale", "slate", "spruce", "tide", "willow",
)


@dataclass
class SynthConfig:
    n_phrases: int = 600
    class_priors: tuple[float, float, float] = (0.85, 0.07, 0.08)
    snr: float = 5.0
    sample_rate: float = 250.0
    n_channels: int = 16
    window_seconds: float = 2.0
    words_per_phrase: tuple[int, int] = (3, 8)
    seed: int = 0

    def __post_init__(self):
        if self.n_phrases < 10:
            raise ValueError("n_phrases must be at least 10")
        priors = tuple(float(p) for p in self.class_priors)
        if len(priors) != 3 or any(p < 0 for p in priors):
            raise ValueError("class_priors must be three non-negative values")
        if abs(sum(priors) - 1.0) > 1e-9:
            raise ValueError(f"class_priors sum to {sum(priors)!r}, expected 1")
        self.class_priors = priors
        if self.snr < 0:
            raise ValueError("snr must be non-negative")
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be positive")
        if self.n_channels < 4:
            raise ValueError("n_channels must be at least 4")
        if self.window_seconds <= 0:
            raise ValueError("window_seconds must be positive")
        lo, hi = self.words_per_phrase
        if lo < 1 or hi < lo:
            raise ValueError("words_per_phrase must be a (low, high) range with low >= 1")


@dataclass
class SynthPaths:
    events: Path
    labels: Path
    recording: Path
    ground_truth: Path
    true_classes: list[int] = field(default_factory=list, repr=False)


def class_channels(cfg: SynthConfig, klass: int) -> range:
    """The fixed quarter-of-channels block carrying class klass's template."""
    quarter = cfg.n_channels // 4
    return range(klass * quarter, (klass + 1) * quarter)


def class_template(cfg: SynthConfig, klass: int) -> np.ndarray:
    """Unit-amplitude class sinusoid sampled over one phrase window."""
    n_steps = int(np.floor(cfg.window_seconds * cfg.sample_rate + 0.5))
    t = np.arange(n_steps) / cfg.sample_rate
    return np.sin(2.0 * np.pi * CLASS_FREQUENCIES_HZ[klass] * t)


def _draw_classes(rng: SplitMix64, cfg: SynthConfig) -> np.ndarray:
    cum = np.cumsum(cfg.class_priors)
    cum[-1] = 1.0  # guard against rounding, uniforms() never exceeds 1
    u = rng.uniforms(cfg.n_phrases)
    return np.searchsorted(cum, u, side="left").astype(np.int64)


def _phrase_events(rng: SplitMix64, cfg: SynthConfig) -> list[Event]:
    """Word events per phrase slot, a pause event between consecutive slots."""
    slot = cfg.window_seconds + PHRASE_GAP_S
    events = []
    for i in range(cfg.n_phrases):
        onset = i * slot
        n_words = cfg.words_per_phrase[0] + int(
            rng.next_u64() % (cfg.words_per_phrase[1] - cfg.words_per_phrase[0] + 1))
        step = cfg.window_seconds / (n_words + 1)
        for j in range(n_words):
            token = _VOCAB[rng.next_u64() % len(_VOCAB)]
            events.append(Event(onset + j * step, 0.8 * step, WORD, token))
        if i < cfg.n_phrases - 1:
            events.append(Event(onset + cfg.window_seconds, PHRASE_GAP_S, PAUSE, ""))
    return events


def generate(cfg: SynthConfig, out_dir) -> SynthPaths:
    """Write events/labels/recording/ground-truth files into out_dir."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    master = SplitMix64(cfg.seed)
    class_rng = SplitMix64(master.next_u64())
    word_rng = SplitMix64(master.next_u64())
    noise_rng = SplitMix64(master.next_u64())

    classes = _draw_classes(class_rng, cfg)
    events = _phrase_events(word_rng, cfg)
    phrases = segment_phrases(events)
    if len(phrases) != cfg.n_phrases:
        raise AssertionError(
            f"generated {len(phrases)} phrases from {cfg.n_phrases} slots")

    slot = cfg.window_seconds + PHRASE_GAP_S
    n_samples = int(np.floor(cfg.n_phrases * slot * cfg.sample_rate + 0.5))
    samples = noise_rng.gaussians(n_samples * cfg.n_channels).reshape(
        n_samples, cfg.n_channels)

    if cfg.snr > 0:
        templates = [cfg.snr * class_template(cfg, k) for k in range(3)]
        blocks = [class_channels(cfg, k) for k in range(3)]
        for i, klass in enumerate(classes):
            start = int(np.floor(i * slot * cfg.sample_rate + 0.5))
            tmpl = templates[klass]
            block = blocks[klass]
            samples[start:start + len(tmpl), block.start:block.stop] += tmpl[:, None]

    labels = []
    for phrase, klass in zip(phrases, classes):
        probs = [0.1, 0.1, 0.1]
        probs[klass] = PEAK_PROBABILITY
        labels.append(SentimentLabel(phrase.id, *probs))

    paths = SynthPaths(
        events=out_dir / "events.tsv",
        labels=out_dir / "labels.tsv",
        recording=out_dir / "recording.bin",
        ground_truth=out_dir / "ground_truth.csv",
        true_classes=[int(k) for k in classes],
    )
    with open(paths.events, "w") as fh:
        write_events(events, fh)
    with open(paths.labels, "w") as fh:
        write_labels(labels, fh)
    with open(paths.recording, "wb") as fh:
        write_recording(Recording(samples.astype(np.float32), cfg.sample_rate), fh)
    with open(paths.ground_truth, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(GROUND_TRUTH_HEADER)
        for phrase, klass in zip(phrases, classes):
            writer.writerow([phrase.id, int(klass)])
    log.info("generated %d phrases (%s) at snr %.3g into %s",
             cfg.n_phrases,
             "/".join(f"{CLASS_NAMES[k]}={int((classes == k).sum())}" for k in range(3)),
             cfg.snr, out_dir)
    return paths


def read_ground_truth(path) -> dict[int, int]:
    """phrase_id -> true class map from a ground-truth CSV."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != list(GROUND_TRUTH_HEADER):
            raise ValueError(f"bad ground-truth header {header!r}")
        return {int(row[0]): int(row[1]) for row in reader}
