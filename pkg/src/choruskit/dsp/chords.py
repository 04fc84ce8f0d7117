"""Chroma-template chord estimation for corpora without chord annotations."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DataError
from .waveform import Waveform

PITCH_NAMES = ("C", "C#", "D", "D#", "E", "F", "F#", "G", "G#", "A", "A#", "B")

# Fold FFT bins whose frequency falls in this band (A1 .. C8).
_FOLD_LO_HZ = 55.0
_FOLD_HI_HZ = 4186.0
_SILENCE_NORM = 1e-9


@dataclass(frozen=True)
class ChordSymbol:
    root: int  # pitch class, 0 = C
    minor: bool = False

    def __post_init__(self):
        if not 0 <= self.root < 12:
            raise DataError(f"chord root must be 0..11, got {self.root}")

    @property
    def name(self) -> str:
        return PITCH_NAMES[self.root] + ("m" if self.minor else "")

    def __str__(self) -> str:
        return self.name


def chord_templates() -> tuple[list[ChordSymbol], np.ndarray]:
    """All 24 binary triad templates: 12 major then 12 minor, (24, 12)."""
    symbols = []
    mat = np.zeros((24, 12))
    for i, minor in enumerate((False, True)):
        for root in range(12):
            row = i * 12 + root
            third = 3 if minor else 4
            for interval in (0, third, 7):
                mat[row, (root + interval) % 12] = 1.0
            symbols.append(ChordSymbol(root=root, minor=minor))
    return symbols, mat


def _chroma(frame: np.ndarray, sample_rate: int) -> np.ndarray:
    mags = np.abs(np.fft.rfft(frame))
    freqs = np.fft.rfftfreq(len(frame), d=1.0 / sample_rate)
    chroma = np.zeros(12)
    band = (freqs >= _FOLD_LO_HZ) & (freqs <= min(_FOLD_HI_HZ, sample_rate / 2))
    for f, m in zip(freqs[band], mags[band]):
        midi = 69.0 + 12.0 * np.log2(f / 440.0)
        chroma[int(round(midi)) % 12] += m
    return chroma


def estimate_chords(waveform: Waveform, hop_ms: int = 250) -> list[ChordSymbol]:
    """Best-matching maj/min triad per hop, consecutive duplicates collapsed.

    Hops whose chroma is (near) silent contribute no symbol.
    """
    hop = int(round(hop_ms * waveform.sample_rate / 1000.0))
    if hop < 1 or len(waveform.samples) < hop:
        raise DataError("waveform shorter than one chord hop")
    symbols, templates = chord_templates()
    tnorm = np.linalg.norm(templates, axis=1)

    out: list[ChordSymbol] = []
    for start in range(0, len(waveform.samples) - hop + 1, hop):
        chroma = _chroma(waveform.samples[start:start + hop], waveform.sample_rate)
        norm = np.linalg.norm(chroma)
        if norm < _SILENCE_NORM:
            continue
        scores = (templates @ chroma) / (tnorm * norm)
        best = symbols[int(np.argmax(scores))]
        if not out or out[-1] != best:
            out.append(best)
    return out
