"""Unsupervised extractive baselines and the encoder-only classifier."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from ..corpus.model import Corpus, Song
from .classifier import TrainConfig, TrainResult, train
from .features import FeatureDataset

TEXTRANK_DAMPING = 0.85
TEXTRANK_TOL = 1e-8
TEXTRANK_MAX_ITER = 200

PACSUM_LAMBDA1 = -2.0
PACSUM_LAMBDA2 = 1.0
PACSUM_BETA = 0.6


def _encode_song(song: Song, encoder) -> np.ndarray:
    return np.stack([encoder.encode(song.id, ln) for ln in song.lines])


def _cosine_matrix(vecs: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(vecs, axis=1)
    safe = np.where(norms < 1e-12, 1.0, norms)
    unit = vecs / safe[:, None]
    sims = unit @ unit.T
    sims[norms < 1e-12, :] = 0.0
    sims[:, norms < 1e-12] = 0.0
    return sims


def baseline_textrank(song: Song, encoder,
                      damping: float = TEXTRANK_DAMPING) -> np.ndarray:
    """Eigenvector-centrality importance over the line similarity graph.

    Damped power iteration on cosine similarities clipped at zero; scores
    sum to one.
    """
    n = len(song.lines)
    if n == 1:
        return np.ones(1)
    sims = np.maximum(_cosine_matrix(_encode_song(song, encoder)), 0.0)
    np.fill_diagonal(sims, 0.0)
    row_sums = sims.sum(axis=1)
    transition = np.where(
        row_sums[:, None] > 0, sims / np.where(row_sums == 0, 1, row_sums)[:, None],
        1.0 / n,
    )
    rank = np.full(n, 1.0 / n)
    for _ in range(TEXTRANK_MAX_ITER):
        new = (1 - damping) / n + damping * (transition.T @ rank)
        if np.max(np.abs(new - rank)) < TEXTRANK_TOL:
            rank = new
            break
        rank = new
    return rank


def baseline_pacsum(song: Song, encoder,
                    lambda1: float = PACSUM_LAMBDA1,
                    lambda2: float = PACSUM_LAMBDA2,
                    beta: float = PACSUM_BETA) -> np.ndarray:
    """Position-aware centrality: forward and backward similarity sums are
    weighted separately after shifting by the beta-quantile similarity."""
    n = len(song.lines)
    if n == 1:
        return np.zeros(1)
    sims = _cosine_matrix(_encode_song(song, encoder))
    iu = np.triu_indices(n, k=1)
    threshold = float(np.quantile(sims[iu], beta))
    shifted = sims - threshold
    scores = np.zeros(n)
    for i in range(n):
        forward = shifted[i, i + 1:].sum()
        backward = shifted[i, :i].sum()
        scores[i] = lambda1 * forward + lambda2 * backward
    return scores


def baseline_ext(
    corpus: Corpus,
    encoder,
    train_song_ids: Sequence[str],
    val_song_ids: Sequence[str],
    config: TrainConfig = TrainConfig(),
) -> tuple[TrainResult, FeatureDataset]:
    """Classifier over raw encoder vectors only (no graph, no tune)."""
    keys = []
    rows = []
    labels = []
    song_rows = {}
    pos = 0
    for song in corpus.songs:
        song_rows[song.id] = np.arange(pos, pos + len(song.lines))
        for ln in song.lines:
            keys.append((song.id, ln.index))
            rows.append(encoder.encode(song.id, ln))
            labels.append(np.nan if ln.label is None else float(ln.label))
        pos += len(song.lines)
    dataset = FeatureDataset(
        keys=keys,
        X=np.stack(rows).astype(np.float32),
        y=np.array(labels),
        blocks={"lyrics": slice(0, encoder.dim)},
        song_rows=song_rows,
    )
    result = train(dataset, train_song_ids, val_song_ids, config)
    return result, dataset
