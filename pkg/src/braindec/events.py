"""Event-annotation parsing and pause-based phrase segmentation.

The events file is UTF-8, tab-separated with LF endings and the header
``onset\tduration\tkind\ttoken``. ``kind`` is ``word`` or ``sp`` (a
narration pause); the token column is empty for pauses. Onsets must be
non-decreasing. Segmentation splits the word stream at every pause whose
duration reaches a configurable minimum (default 0.0: every pause splits).
"""

from __future__ import annotations

import string
from dataclasses import dataclass
from typing import Iterable, TextIO

EVENTS_HEADER = "onset\tduration\tkind\ttoken"
PHRASES_HEADER = "id\tonset\toffset\ttext"

WORD = "word"
PAUSE = "pause"

_KIND_FROM_FILE = {"word": WORD, "sp": PAUSE}
_KIND_TO_FILE = {WORD: "word", PAUSE: "sp"}

_STRIP_CHARS = string.punctuation


class FormatError(ValueError):
    """A file does not conform to its documented format."""


@dataclass(frozen=True)
class Event:
    """One annotated token: a word or a narration pause."""

    onset: float
    duration: float
    kind: str
    token: str = ""

    def __post_init__(self):
        if self.onset < 0 or self.duration < 0:
            raise ValueError(f"onset/duration must be non-negative, got "
                             f"({self.onset}, {self.duration})")
        if self.kind not in (WORD, PAUSE):
            raise ValueError(f"unknown event kind {self.kind!r}")


@dataclass(frozen=True)
class Phrase:
    """A maximal run of words between pauses, the unit of labeling."""

    id: int
    tokens: tuple[str, ...]
    onset: float
    offset: float

    def __post_init__(self):
        if not self.tokens:
            raise ValueError("phrase must contain at least one token")
        if self.onset > self.offset:
            raise ValueError(f"phrase onset {self.onset} after offset {self.offset}")

    @property
    def text(self) -> str:
        return " ".join(self.tokens)


def normalize_token(raw: str) -> str:
    """Lowercase and strip leading/trailing ASCII punctuation.

    Internal characters are left untouched. May return an empty string
    (punctuation-only tokens); callers drop those.
    """
    return raw.strip(_STRIP_CHARS).lower()


def _parse_float(text: str, line_no: int, column: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise FormatError(f"unparsable {column} {text!r} at line {line_no}") from None


def parse_events(source: Iterable[str]) -> list[Event]:
    """Parse an events file into a validated, file-ordered Event list."""
    lines = iter(source)
    try:
        header = next(lines).rstrip("\n")
    except StopIteration:
        raise FormatError("empty events file: missing header") from None
    if header != EVENTS_HEADER:
        raise FormatError(f"bad events header {header!r}, expected {EVENTS_HEADER!r}")

    events: list[Event] = []
    prev_onset = None
    for line_no, line in enumerate(lines, start=2):
        line = line.rstrip("\n")
        if not line:
            continue
        cols = line.split("\t")
        if len(cols) != 4:
            raise FormatError(f"expected 4 columns, found {len(cols)} at line {line_no}")
        onset = _parse_float(cols[0], line_no, "onset")
        duration = _parse_float(cols[1], line_no, "duration")
        if cols[2] not in _KIND_FROM_FILE:
            raise FormatError(f"unknown kind {cols[2]!r} at line {line_no}")
        kind = _KIND_FROM_FILE[cols[2]]
        if onset < 0 or duration < 0:
            raise FormatError(f"negative onset or duration at line {line_no}")
        if kind == WORD and not cols[3]:
            raise FormatError(f"word event with empty token at line {line_no}")
        if prev_onset is not None and onset < prev_onset:
            raise FormatError(
                f"non-monotonic onset at line {line_no}: {onset} after {prev_onset}"
            )
        prev_onset = onset
        events.append(Event(onset, duration, kind, cols[3]))
    return events


def write_events(events: Iterable[Event], out: TextIO) -> None:
    """Emit the documented events format (inverse of parse_events)."""
    out.write(EVENTS_HEADER + "\n")
    for ev in events:
        out.write(f"{ev.onset:.6f}\t{ev.duration:.6f}\t{_KIND_TO_FILE[ev.kind]}\t{ev.token}\n")


def segment_phrases(events: list[Event], min_pause_s: float = 0.0) -> list[Phrase]:
    """Split the word stream into phrases at pause events.

    Pauses shorter than ``min_pause_s`` do not split. Consecutive, leading,
    and trailing pauses produce no empty phrases; punctuation-only words are
    dropped after normalization. Phrase onset is the first member word's
    onset; offset is the last member word's onset + duration.
    """
    phrases: list[Phrase] = []
    current: list[Event] = []

    def flush():
        if not current:
            return
        tokens = tuple(normalize_token(ev.token) for ev in current)
        phrases.append(Phrase(
            id=len(phrases),
            tokens=tokens,
            onset=current[0].onset,
            offset=current[-1].onset + current[-1].duration,
        ))
        current.clear()

    for ev in events:
        if ev.kind == PAUSE:
            if ev.duration >= min_pause_s:
                flush()
        elif normalize_token(ev.token):
            current.append(ev)
    flush()
    return phrases


def write_phrases(phrases: Iterable[Phrase], out: TextIO) -> None:
    out.write(PHRASES_HEADER + "\n")
    for ph in phrases:
        out.write(f"{ph.id}\t{ph.onset:.6f}\t{ph.offset:.6f}\t{ph.text}\n")


def parse_phrases(source: Iterable[str]) -> list[Phrase]:
    """Read a phrases file written by write_phrases."""
    lines = iter(source)
    try:
        header = next(lines).rstrip("\n")
    except StopIteration:
        raise FormatError("empty phrases file: missing header") from None
    if header != PHRASES_HEADER:
        raise FormatError(f"bad phrases header {header!r}, expected {PHRASES_HEADER!r}")
    phrases = []
    for line_no, line in enumerate(lines, start=2):
        line = line.rstrip("\n")
        if not line:
            continue
        cols = line.split("\t")
        if len(cols) != 4:
            raise FormatError(f"expected 4 columns, found {len(cols)} at line {line_no}")
        try:
            pid = int(cols[0])
        except ValueError:
            raise FormatError(f"unparsable id {cols[0]!r} at line {line_no}") from None
        onset = _parse_float(cols[1], line_no, "onset")
        offset = _parse_float(cols[2], line_no, "offset")
        tokens = tuple(cols[3].split(" ")) if cols[3] else ()
        phrases.append(Phrase(pid, tokens, onset, offset))
    return phrases
