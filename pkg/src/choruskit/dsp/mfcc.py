"""MFCC extraction: 13 cepstral coefficients per frame, prune/pad helper.

Pipeline: pre-emphasis, Hamming-windowed frames, power spectrum, triangular
mel filterbank, natural log with a silence floor, orthonormal DCT-II
keeping coefficients 0..12.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.fft import dct

from ..errors import DataError
from .waveform import Waveform

N_COEFF = 13
TARGET_FRAMES = 1280


@dataclass(frozen=True)
class MfccConfig:
    frame_ms: float = 25.0
    hop_ms: float = 10.0
    pre_emphasis: float = 0.97
    n_fft: int = 512
    n_mels: int = 26
    fmin: float = 0.0
    fmax: Optional[float] = None  # defaults to sample_rate / 2
    log_floor: float = 1e-10

    def __post_init__(self):
        if self.n_mels < N_COEFF:
            raise DataError(f"n_mels must be >= {N_COEFF}, got {self.n_mels}")
        if not self.frame_ms > self.hop_ms > 0:
            raise DataError("need frame_ms > hop_ms > 0")


def _hz_to_mel(hz):
    return 2595.0 * np.log10(1.0 + np.asarray(hz, dtype=np.float64) / 700.0)


def _mel_to_hz(mel):
    return 700.0 * (10.0 ** (np.asarray(mel, dtype=np.float64) / 2595.0) - 1.0)


def mel_filterbank(
    n_mels: int, n_fft: int, sample_rate: int, fmin: float, fmax: float
) -> np.ndarray:
    """Triangular filters over FFT bins, (n_mels, n_fft // 2 + 1)."""
    mel_pts = np.linspace(_hz_to_mel(fmin), _hz_to_mel(fmax), n_mels + 2)
    bins = np.floor((n_fft + 1) * _mel_to_hz(mel_pts) / sample_rate).astype(int)
    fb = np.zeros((n_mels, n_fft // 2 + 1))
    for j in range(n_mels):
        lo, mid, hi = bins[j], bins[j + 1], bins[j + 2]
        for i in range(lo, mid):
            fb[j, i] = (i - lo) / max(mid - lo, 1)
        for i in range(mid, hi):
            fb[j, i] = (hi - i) / max(hi - mid, 1)
    return fb


def cepstra_from_log_mel(log_mel: np.ndarray) -> np.ndarray:
    """Orthonormal DCT-II over log-mel rows, keeping the first 13 coefficients.

    Exposed separately so tests can feed synthetic filterbank energies.
    """
    return dct(log_mel, type=2, axis=1, norm="ortho")[:, :N_COEFF]


def compute_mfcc(waveform: Waveform, config: MfccConfig = MfccConfig()) -> np.ndarray:
    """MFCC matrix of shape (frames, 13) at the waveform's own sample rate."""
    sr = waveform.sample_rate
    frame = int(round(config.frame_ms * sr / 1000.0))
    hop = int(round(config.hop_ms * sr / 1000.0))
    x = waveform.samples.astype(np.float64)
    if len(x) < frame:
        raise DataError(
            f"waveform of {len(x)} samples is shorter than one {frame}-sample frame"
        )
    if frame > config.n_fft:
        raise DataError(f"frame of {frame} samples exceeds n_fft {config.n_fft}")

    emphasized = np.empty_like(x)
    emphasized[0] = x[0]
    emphasized[1:] = x[1:] - config.pre_emphasis * x[:-1]

    n_frames = 1 + (len(x) - frame) // hop
    idx = np.arange(frame)[None, :] + hop * np.arange(n_frames)[:, None]
    frames = emphasized[idx] * np.hamming(frame)[None, :]

    spectrum = np.fft.rfft(frames, n=config.n_fft, axis=1)
    power = (np.abs(spectrum) ** 2) / config.n_fft

    fmax = config.fmax if config.fmax is not None else sr / 2.0
    fb = mel_filterbank(config.n_mels, config.n_fft, sr, config.fmin, fmax)
    mel_energy = power @ fb.T
    log_mel = np.log(np.maximum(mel_energy, config.log_floor))
    return cepstra_from_log_mel(log_mel)


def fit_frames(mfcc: np.ndarray, target_frames: int = TARGET_FRAMES) -> np.ndarray:
    """Truncate or zero-pad the frame axis to a fixed length."""
    mfcc = np.atleast_2d(np.asarray(mfcc, dtype=np.float64))
    if mfcc.size == 0:
        mfcc = mfcc.reshape(0, N_COEFF)
    if mfcc.shape[1] != N_COEFF:
        raise DataError(f"expected {N_COEFF} columns, got {mfcc.shape[1]}")
    n = mfcc.shape[0]
    if n >= target_frames:
        return mfcc[:target_frames].copy()
    out = np.zeros((target_frames, N_COEFF))
    out[:n] = mfcc
    return out


_MAGIC = b"MFCC1"


def save_matrix(path, matrix: np.ndarray) -> None:
    """Write ``MFCC1 rows cols`` header then row-major little-endian float32."""
    matrix = np.atleast_2d(np.asarray(matrix))
    header = f"{_MAGIC.decode()} {matrix.shape[0]} {matrix.shape[1]}\n".encode()
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(matrix.astype("<f4").tobytes(order="C"))


def load_matrix(path) -> np.ndarray:
    with open(path, "rb") as fh:
        header = fh.readline().split()
        if len(header) != 3 or header[0] != _MAGIC:
            raise DataError(f"{path}: not a {_MAGIC.decode()} matrix file")
        rows, cols = int(header[1]), int(header[2])
        data = np.frombuffer(fh.read(rows * cols * 4), dtype="<f4")
    if data.size != rows * cols:
        raise DataError(f"{path}: truncated matrix payload")
    return data.reshape(rows, cols).astype(np.float64)
