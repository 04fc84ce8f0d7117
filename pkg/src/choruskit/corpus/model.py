"""Canonical song model: timed lyric lines, optional labels, chords, audio.

All values are immutable after construction and safe to share across
workers; label/chord attachment produces new objects.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional, Union

import numpy as np

from ..errors import DataError

# Audio is either an in-memory waveform (dsp.Waveform) or a path to a WAV
# file; kept untyped here to avoid a corpus->dsp import cycle.
AudioRef = Union[object, str, None]

ChordSeq = tuple[str, ...]


@dataclass(frozen=True)
class LyricLine:
    """One timed lyric line; ``label`` is True for chorus lines."""

    index: int
    text: str
    start_ms: int
    end_ms: int
    label: Optional[bool] = None

    def __post_init__(self):
        if not self.text.strip():
            raise DataError(f"line {self.index}: empty text")
        if self.start_ms >= self.end_ms:
            raise DataError(
                f"line {self.index}: start_ms {self.start_ms} >= end_ms {self.end_ms}"
            )


@dataclass(frozen=True)
class Song:
    id: str
    lines: tuple[LyricLine, ...]
    chords: Optional[tuple[ChordSeq, ...]] = None
    audio: AudioRef = None

    def __post_init__(self):
        for i, line in enumerate(self.lines):
            if line.index != i:
                raise DataError(f"song {self.id}: line indices not contiguous at {i}")
        starts = [ln.start_ms for ln in self.lines]
        if starts != sorted(starts):
            raise DataError(f"song {self.id}: lines not sorted by start_ms")
        if self.chords is not None and len(self.chords) != len(self.lines):
            raise DataError(
                f"song {self.id}: {len(self.chords)} chord sequences for "
                f"{len(self.lines)} lines"
            )

    @property
    def is_labeled(self) -> bool:
        return all(ln.label is not None for ln in self.lines)

    def line_chords(self, index: int) -> ChordSeq:
        if self.chords is None:
            return ()
        return self.chords[index]


@dataclass(frozen=True)
class SplitAssignment:
    """Per-song split: maps song id to one of 'train', 'validation', 'test'."""

    by_song: dict[str, str] = field(default_factory=dict)

    def songs_in(self, corpus: "Corpus", part: str) -> list[Song]:
        return [s for s in corpus.songs if self.by_song.get(s.id) == part]


@dataclass(frozen=True)
class Corpus:
    songs: tuple[Song, ...]
    split: Optional[SplitAssignment] = None

    def __post_init__(self):
        ids = [s.id for s in self.songs]
        if len(set(ids)) != len(ids):
            raise DataError("duplicate song ids in corpus")

    def song(self, song_id: str) -> Song:
        for s in self.songs:
            if s.id == song_id:
                return s
        raise DataError(f"unknown song id {song_id!r}")

    def with_songs(self, songs: tuple[Song, ...]) -> "Corpus":
        return replace(self, songs=songs)


def split_corpus(
    corpus: Corpus, ratios: tuple[float, float, float], seed: int
) -> SplitAssignment:
    """Assign whole songs to train/validation/test.

    Validation and test counts are floor-rounded from their ratios; the
    remainder goes to train. Deterministic for a fixed seed.
    """
    if any(r <= 0 for r in ratios):
        raise DataError("split ratios must be positive")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise DataError(f"split ratios sum to {sum(ratios)}, expected 1")
    n = len(corpus.songs)
    if n < 3:
        raise DataError(f"need at least 3 songs to split, got {n}")
    n_val = int(n * ratios[1])
    n_test = int(n * ratios[2])
    n_train = n - n_val - n_test

    ids = sorted(s.id for s in corpus.songs)
    rng = np.random.default_rng(seed)
    rng.shuffle(ids)
    by_song = {}
    for i, sid in enumerate(ids):
        if i < n_train:
            by_song[sid] = "train"
        elif i < n_train + n_val:
            by_song[sid] = "validation"
        else:
            by_song[sid] = "test"
    return SplitAssignment(by_song=by_song)


@dataclass(frozen=True)
class CorpusStats:
    songs: int
    lines: int
    mean_lines_per_song: float
    chorus_fraction: float


def corpus_stats(corpus: Corpus) -> CorpusStats:
    """Song/line counts, mean lines per song (2 decimals), chorus fraction."""
    n_songs = len(corpus.songs)
    n_lines = sum(len(s.lines) for s in corpus.songs)
    mean = round(n_lines / n_songs, 2) if n_songs else 0.0
    labeled = [ln for s in corpus.songs for ln in s.lines if ln.label is not None]
    frac = sum(1 for ln in labeled if ln.label) / len(labeled) if labeled else 0.0
    return CorpusStats(n_songs, n_lines, mean, frac)
