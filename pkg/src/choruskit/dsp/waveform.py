"""Mono waveforms: WAV I/O, resampling, and line-span slicing."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.io import wavfile

from ..errors import DataError


@dataclass(frozen=True)
class Waveform:
    samples: np.ndarray  # float, 1-D
    sample_rate: int

    def __post_init__(self):
        if self.sample_rate <= 0:
            raise DataError(f"sample rate must be positive, got {self.sample_rate}")
        if self.samples.ndim != 1:
            raise DataError("waveform must be mono (1-D)")
        if not np.all(np.isfinite(self.samples)):
            raise DataError("waveform contains non-finite samples")

    @property
    def duration_ms(self) -> float:
        return len(self.samples) * 1000.0 / self.sample_rate


def load_wav(path) -> Waveform:
    """Read a mono PCM WAV (16-bit int or 32/64-bit float) as floats in [-1, 1]."""
    rate, data = wavfile.read(path)
    if data.ndim != 1:
        raise DataError(f"{path}: expected mono WAV, got shape {data.shape}")
    if data.dtype == np.int16:
        samples = data.astype(np.float64) / 32768.0
    elif data.dtype in (np.float32, np.float64):
        samples = data.astype(np.float64)
    elif data.dtype == np.int32:
        samples = data.astype(np.float64) / 2147483648.0
    else:
        raise DataError(f"{path}: unsupported WAV sample format {data.dtype}")
    return Waveform(samples=samples, sample_rate=int(rate))


def save_wav(path, waveform: Waveform) -> None:
    wavfile.write(path, waveform.sample_rate, waveform.samples.astype(np.float32))


def resample(waveform: Waveform, target_rate: int) -> Waveform:
    """Resample by linear interpolation; identity when rates already match."""
    if target_rate <= 0:
        raise DataError("target rate must be positive")
    if waveform.sample_rate == target_rate:
        return waveform
    n_src = len(waveform.samples)
    n_dst = int(round(n_src * target_rate / waveform.sample_rate))
    src_pos = np.arange(n_dst, dtype=np.float64) * (waveform.sample_rate / target_rate)
    out = np.interp(src_pos, np.arange(n_src, dtype=np.float64), waveform.samples)
    return Waveform(samples=out, sample_rate=target_rate)


def slice_line_audio(song_waveform: Waveform, line) -> Waveform:
    """Cut the samples covering ``[start_ms, end_ms)`` of a lyric line.

    Spans running past the end of the audio are clipped; a span starting at
    or after the end (or empty) raises DataError.
    """
    sr = song_waveform.sample_rate
    n = len(song_waveform.samples)
    start = (line.start_ms * sr) // 1000
    end = (line.end_ms * sr) // 1000
    if start >= end:
        raise DataError(
            f"empty audio span [{line.start_ms}, {line.end_ms}) for line {line.index}"
        )
    if start >= n:
        raise DataError(
            f"line {line.index} starts at {line.start_ms} ms, past end of audio"
        )
    return Waveform(samples=song_waveform.samples[start:min(end, n)], sample_rate=sr)
