"""Recordings, fixed-window epochs, seeded splits, and standardization.

Recording binary format (little-endian throughout): magic ``MGR1``,
u32 format version (=1), u32 n_channels, f64 sample_rate, u64 n_samples,
then n_samples x n_channels f32 values in time-major order (all channels of
sample 0, then sample 1, ...).

Splits are reproducible across implementations: a Fisher-Yates shuffle
driven by SplitMix64 (see rng module) seeded with the split seed, followed
by contiguous assignment of floor(f_train*n) epochs to train, floor(f_val*n)
to validation, and the remainder to test.
"""

from __future__ import annotations

import logging
import struct
from dataclasses import dataclass, replace
from typing import BinaryIO, Sequence

import numpy as np

from .events import FormatError, Phrase
from .labels import SentimentLabel
from .rng import SplitMix64

log = logging.getLogger(__name__)

RECORDING_MAGIC = b"MGR1"
RECORDING_VERSION = 1
_HEADER = struct.Struct("<4sIIdQ")

TRAIN, VAL, TEST = "train", "val", "test"
SPLIT_NAMES = (TRAIN, VAL, TEST)
MANIFEST_HEADER = "phrase_id\tsplit"

DEFAULT_FRACTIONS = (0.8, 0.1, 0.1)
_STD_GUARD = 1e-8


@dataclass(frozen=True)
class Recording:
    """A multichannel time series, time-major [n_samples x n_channels]."""

    samples: np.ndarray  # float32, shape (n_samples, n_channels)
    sample_rate: float

    def __post_init__(self):
        if self.samples.ndim != 2 or self.samples.shape[0] < 1 or self.samples.shape[1] < 1:
            raise ValueError(f"recording must be a non-empty 2-d array, got {self.samples.shape}")
        if self.sample_rate <= 0:
            raise ValueError(f"sample rate must be positive, got {self.sample_rate}")
        if not np.isfinite(self.samples).all():
            bad = np.argwhere(~np.isfinite(self.samples))[0]
            raise ValueError(f"non-finite sample at (sample {bad[0]}, channel {bad[1]})")

    @property
    def n_samples(self) -> int:
        return self.samples.shape[0]

    @property
    def n_channels(self) -> int:
        return self.samples.shape[1]

    @property
    def duration(self) -> float:
        return self.n_samples / self.sample_rate


@dataclass(frozen=True)
class Epoch:
    """A fixed T x C window aligned to one phrase, paired with its soft label."""

    phrase_id: int
    data: np.ndarray  # float64, shape (T, C)
    label: SentimentLabel


@dataclass(frozen=True)
class Dataset:
    """Epochs plus a seeded split assignment and optional train-split statistics."""

    epochs: tuple[Epoch, ...]
    split_of: dict[int, str]
    seed: int
    norm_mean: np.ndarray | None = None  # per-channel, from train only
    norm_std: np.ndarray | None = None

    def split_epochs(self, split: str) -> list[Epoch]:
        if split not in SPLIT_NAMES:
            raise ValueError(f"unknown split {split!r}")
        return [ep for ep in self.epochs if self.split_of[ep.phrase_id] == split]

    @property
    def standardized(self) -> bool:
        return self.norm_mean is not None

    def inverse_standardize(self, data: np.ndarray) -> np.ndarray:
        if not self.standardized:
            raise ValueError("dataset is not standardized")
        return data * (self.norm_std + _STD_GUARD) + self.norm_mean


def read_recording(stream: BinaryIO) -> Recording:
    """Read and validate the recording binary format."""
    header = stream.read(_HEADER.size)
    if len(header) < _HEADER.size:
        raise FormatError("truncated recording header")
    magic, version, n_channels, sample_rate, n_samples = _HEADER.unpack(header)
    if magic != RECORDING_MAGIC:
        raise FormatError(f"bad magic {magic!r}, expected {RECORDING_MAGIC!r}")
    if version != RECORDING_VERSION:
        raise FormatError(f"unsupported recording version {version}")
    if n_channels < 1 or n_samples < 1:
        raise FormatError(f"empty recording ({n_samples} samples x {n_channels} channels)")
    expected = n_samples * n_channels * 4
    payload = stream.read()
    if len(payload) != expected:
        raise FormatError(f"expected {expected} bytes of samples, found {len(payload)}")
    samples = np.frombuffer(payload, dtype="<f4").reshape(n_samples, n_channels)
    return Recording(samples=samples, sample_rate=sample_rate)


def write_recording(rec: Recording, stream: BinaryIO) -> None:
    """Emit the recording binary format (inverse of read_recording)."""
    stream.write(_HEADER.pack(RECORDING_MAGIC, RECORDING_VERSION,
                              rec.n_channels, rec.sample_rate, rec.n_samples))
    stream.write(np.ascontiguousarray(rec.samples, dtype="<f4").tobytes())


def extract_epochs(
    rec: Recording,
    phrases: Sequence[Phrase],
    labels: Sequence[SentimentLabel],
    window_seconds: float,
) -> tuple[list[Epoch], int]:
    """Cut the window [onset, onset + window_seconds) for every phrase.

    Samples past the recording end are zero-padded; phrases whose onset lies
    at or beyond the end are skipped. Returns (epochs, skipped count).
    """
    if window_seconds <= 0:
        raise ValueError(f"window must be positive, got {window_seconds}")
    by_id = {lab.phrase_id: lab for lab in labels}
    n_steps = int(np.floor(window_seconds * rec.sample_rate + 0.5))
    epochs: list[Epoch] = []
    skipped = 0
    for ph in phrases:
        if ph.id not in by_id:
            raise ValueError(f"no label for phrase {ph.id}")
        start = int(np.floor(ph.onset * rec.sample_rate + 0.5))
        if start >= rec.n_samples:
            skipped += 1
            continue
        stop = min(start + n_steps, rec.n_samples)
        data = np.zeros((n_steps, rec.n_channels), dtype=np.float64)
        data[: stop - start] = rec.samples[start:stop]
        epochs.append(Epoch(ph.id, data, by_id[ph.id]))
    if skipped:
        log.warning("skipped %d phrase(s) starting at or beyond the recording end", skipped)
    return epochs, skipped


def split_ids(ids: Sequence[int], fractions: tuple[float, float, float], seed: int) -> dict[int, str]:
    """Deterministic id -> split assignment (see module docstring for the rule)."""
    if abs(sum(fractions) - 1.0) > 1e-9:
        raise ValueError(f"split fractions must sum to 1, got {fractions}")
    if any(f < 0 for f in fractions):
        raise ValueError(f"split fractions must be non-negative, got {fractions}")
    n = len(ids)
    shuffled = list(ids)
    SplitMix64(seed).shuffle(shuffled)
    n_train = int(fractions[0] * n)
    n_val = int(fractions[1] * n)
    assignment = {}
    for pos, pid in enumerate(shuffled):
        if pos < n_train:
            assignment[pid] = TRAIN
        elif pos < n_train + n_val:
            assignment[pid] = VAL
        else:
            assignment[pid] = TEST
    return assignment


def split_dataset(
    epochs: Sequence[Epoch],
    fractions: tuple[float, float, float] = DEFAULT_FRACTIONS,
    seed: int = 0,
) -> Dataset:
    """Assign epochs to train/val/test with a seeded shuffle."""
    if len(epochs) < 10:
        raise ValueError(f"need at least 10 epochs to split, got {len(epochs)}")
    ids = [ep.phrase_id for ep in epochs]
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate phrase ids among epochs")
    return Dataset(tuple(epochs), split_ids(ids, fractions, seed), seed)


def standardize(ds: Dataset) -> Dataset:
    """Standardize every epoch per channel using train-split statistics only.

    x -> (x - mean_c) / (std_c + 1e-8) with population std over all train
    samples; constant channels are guarded by the 1e-8 term.
    """
    train = ds.split_epochs(TRAIN)
    if not train:
        raise ValueError("train split is empty")
    stacked = np.concatenate([ep.data for ep in train], axis=0)
    mean = stacked.mean(axis=0)
    std = stacked.std(axis=0)
    denom = std + _STD_GUARD
    transformed = tuple(
        replace(ep, data=(ep.data - mean) / denom) for ep in ds.epochs
    )
    return Dataset(transformed, dict(ds.split_of), ds.seed, mean, std)


def write_manifest(ds: Dataset, out) -> None:
    """Tab-separated phrase_id -> split assignment, in epoch order."""
    out.write(MANIFEST_HEADER + "\n")
    for ep in ds.epochs:
        out.write(f"{ep.phrase_id}\t{ds.split_of[ep.phrase_id]}\n")
