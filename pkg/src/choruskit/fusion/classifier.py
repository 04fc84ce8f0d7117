"""Sigmoid classifier over fused features with cross-entropy, Adam,
grid-searched learning rate and epoch count, and optional joint training
of the graph-attention stack or chord embedding rows.
"""

from __future__ import annotations

import logging
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.special import expit, log_expit

from ..errors import DataError
from ..hgat.model import propagate, propagate_backward
from ..hgat.params import GatParams
from ..optim import Adam
from .features import FeatureDataset
from .metrics import evaluate

log = logging.getLogger(__name__)

THRESHOLD = 0.5


@dataclass(frozen=True)
class TrainConfig:
    lr_grid: tuple[float, ...] = (2e-4, 4e-4, 6e-4, 8e-4)
    epoch_grid: tuple[int, ...] = (3, 4, 5, 6)
    batch_size: int = 128
    seed: int = 0
    standardize: bool = True
    finetune_gat: bool = False
    finetune_chords: bool = False

    def __post_init__(self):
        if not self.lr_grid or not self.epoch_grid:
            raise DataError("grids must be nonempty")

    @classmethod
    def default_point(cls, **kw) -> "TrainConfig":
        """The single best-known grid point (lr 6e-4, 5 epochs)."""
        return cls(lr_grid=(6e-4,), epoch_grid=(5,), **kw)


@dataclass
class FusionClassifier:
    weights: np.ndarray  # over selected columns
    bias: float
    mean: np.ndarray
    scale: np.ndarray
    cols: np.ndarray  # column indices into the full fused vector
    block_names: tuple[str, ...]

    def decision(self, x_cols: np.ndarray) -> np.ndarray:
        xs = (x_cols - self.mean) / self.scale
        return xs @ self.weights + self.bias

    def predict_proba(self, x_cols: np.ndarray) -> np.ndarray:
        return expit(self.decision(x_cols))


def logistic_loss_and_grads(x_std: np.ndarray, y: np.ndarray,
                            weights: np.ndarray, bias: float):
    """Mean cross-entropy of the sigmoid classifier plus analytic grads."""
    logits = x_std @ weights + bias
    loss = -float(np.mean(np.where(y > 0.5, log_expit(logits),
                                   log_expit(-logits))))
    g = (expit(logits) - y) / len(y)
    return loss, x_std.T @ g, float(g.sum())


def _select_cols(dataset: FeatureDataset, modalities) -> tuple[np.ndarray, tuple]:
    names = tuple(modalities) if modalities else tuple(dataset.blocks)
    for m in names:
        if m not in dataset.blocks:
            raise DataError(f"unknown modality {m!r}")
    cols = np.concatenate([
        np.arange(dataset.blocks[m].start, dataset.blocks[m].stop)
        for m in names
    ])
    return cols, names


def _live_X(dataset: FeatureDataset, rows: np.ndarray,
            gat_params: Optional[GatParams],
            chord_matrix: Optional[np.ndarray],
            want_caches: bool = False):
    """Full-width float64 feature rows, re-deriving the lyric block (live
    graph params) and/or chord block (live embedding rows) when given."""
    X = dataset.X[rows].astype(np.float64)
    song_ctx = {}
    if gat_params is not None:
        lyr = dataset.blocks["lyrics"]
        by_song = defaultdict(list)
        for pos, row in enumerate(rows):
            sid, line_idx = dataset.keys[row]
            by_song[sid].append((pos, line_idx))
        for sid in sorted(by_song):
            result = propagate(dataset.graphs[sid], gat_params)
            for pos, line_idx in by_song[sid]:
                X[pos, lyr] = result.lines[line_idx]
            if want_caches:
                song_ctx[sid] = (result, by_song[sid])
    if chord_matrix is not None:
        ch = dataset.blocks["chords"]
        ids = dataset.chord_ids[rows]
        valid = ids >= 0
        gathered = chord_matrix[np.maximum(ids, 0)]
        gathered[~valid] = 0.0
        X[:, ch] = gathered.reshape(len(rows), -1)
    return X, song_ctx


def predict(dataset: FeatureDataset, classifier: FusionClassifier,
            rows: Optional[np.ndarray] = None,
            gat_params: Optional[GatParams] = None,
            chord_matrix: Optional[np.ndarray] = None) -> np.ndarray:
    if rows is None:
        rows = np.arange(len(dataset.keys))
    if gat_params is None and chord_matrix is None:
        x_cols = dataset.X[rows][:, classifier.cols].astype(np.float64)
    else:
        X, _ = _live_X(dataset, rows, gat_params, chord_matrix)
        x_cols = X[:, classifier.cols]
    return classifier.predict_proba(x_cols)


@dataclass
class TrainResult:
    classifier: FusionClassifier
    grid_lr: float
    grid_epochs: int
    val_f1: float
    grid_history: list[tuple[float, int, float]] = field(default_factory=list)
    degenerate: bool = False
    gat_params: Optional[GatParams] = None
    chord_matrix: Optional[np.ndarray] = None

    @property
    def runs(self) -> int:
        return len(self.grid_history)


def _standardizer(x_cols: np.ndarray, enabled: bool):
    if not enabled:
        return np.zeros(x_cols.shape[1]), np.ones(x_cols.shape[1])
    mean = x_cols.mean(axis=0, dtype=np.float64)
    std = x_cols.std(axis=0, dtype=np.float64)
    return mean, np.where(std < 1e-8, 1.0, std)


def _fit_frozen(x_std, y, lr, epochs, batch_size, seed):
    n, d = x_std.shape
    w = np.zeros(d)
    b = np.zeros(1)
    adam = Adam(lr=lr)
    rng = np.random.default_rng(seed)
    for _ in range(epochs):
        order = rng.permutation(n)
        for start in range(0, n, batch_size):
            rows = order[start:start + batch_size]
            _, dw, db = logistic_loss_and_grads(x_std[rows], y[rows], w, b[0])
            adam.step({"clf_w": w, "clf_b": b},
                      {"clf_w": dw, "clf_b": np.array([db])})
    return w, float(b[0])


def _fit_live(dataset, train_rows, cols, mean, scale, y, lr, epochs,
              batch_size, seed, gat_params, chord_matrix):
    lyr = dataset.blocks["lyrics"]
    ch = dataset.blocks["chords"]
    d = len(cols)
    w = np.zeros(d)
    b = np.zeros(1)
    adam = Adam(lr=lr)
    rng = np.random.default_rng(seed)
    n = len(train_rows)
    for _ in range(epochs):
        order = rng.permutation(n)
        for start in range(0, n, batch_size):
            batch = train_rows[order[start:start + batch_size]]
            yb = y[order[start:start + batch_size]]
            X, song_ctx = _live_X(dataset, batch, gat_params, chord_matrix,
                                  want_caches=gat_params is not None)
            x_std = (X[:, cols] - mean) / scale
            logits = x_std @ w + b[0]
            g = (expit(logits) - yb) / len(yb)

            grads = {"clf_w": x_std.T @ g, "clf_b": np.array([g.sum()])}
            # gradient w.r.t. raw (unstandardized) features per row
            d_raw_cols = np.outer(g, w / scale)
            d_raw = np.zeros((len(batch), dataset.dim))
            d_raw[:, cols] = d_raw_cols

            tensors = {"clf_w": w, "clf_b": b}
            if chord_matrix is not None:
                ids = dataset.chord_ids[batch]
                dim = chord_matrix.shape[1]
                d_table = np.zeros_like(chord_matrix)
                d_block = d_raw[:, ch].reshape(len(batch), -1, dim)
                for k in range(ids.shape[1]):
                    valid = ids[:, k] >= 0
                    if valid.any():
                        np.add.at(d_table, ids[valid, k], d_block[valid, k])
                grads["chord_table"] = d_table
                tensors["chord_table"] = chord_matrix
            if gat_params is not None:
                for sid, (result, positions) in song_ctx.items():
                    d_lines = np.zeros_like(result.lines)
                    for pos, line_idx in positions:
                        d_lines[line_idx] += d_raw[pos, lyr]
                    propagate_backward(dataset.graphs[sid], gat_params,
                                       result, d_lines, grads)
                tensors.update(gat_params.tensors)
            adam.step(tensors, grads)
    return w, float(b[0])


def train(
    dataset: FeatureDataset,
    train_song_ids: Sequence[str],
    val_song_ids: Sequence[str],
    config: TrainConfig = TrainConfig(),
    gat_params: Optional[GatParams] = None,
    chord_table=None,
    modalities: Optional[Sequence[str]] = None,
) -> TrainResult:
    """Grid-search lr and epochs on validation F1.

    Ties go to the lower learning rate, then the fewer epochs; per-run
    seeds derive as ``seed + grid_index``. With a finetune flag set the
    corresponding parameters are copied and updated jointly per run.
    """
    if config.finetune_gat:
        if gat_params is None:
            raise DataError("finetune_gat requires gat_params")
        if gat_params.frozen:
            raise DataError("gat params are frozen; thaw() to fine-tune")
    if config.finetune_chords and chord_table is None:
        raise DataError("finetune_chords requires the chord table")

    cols, names = _select_cols(dataset, modalities)
    train_rows = dataset.rows_for(sorted(train_song_ids))
    val_rows = dataset.rows_for(sorted(val_song_ids))
    if len(train_rows) == 0 or len(val_rows) == 0:
        raise DataError("empty train or validation split")
    y_tr = dataset.y[train_rows]
    y_val = dataset.y[val_rows]
    if np.isnan(y_tr).any() or np.isnan(y_val).any():
        raise DataError("train/validation lines must all be labeled")

    degenerate = False
    for part, y in (("train", y_tr), ("validation", y_val)):
        if len(set(y.tolist())) < 2:
            log.warning("%s split contains a single class", part)
            degenerate = True

    x_tr_cols = dataset.X[train_rows][:, cols].astype(np.float64)
    mean, scale = _standardizer(x_tr_cols, config.standardize)

    live = config.finetune_gat or config.finetune_chords
    x_std = None if live else (x_tr_cols - mean) / scale
    points = [(lr, ep) for lr in sorted(config.lr_grid)
              for ep in sorted(config.epoch_grid)]
    best = None
    history = []
    for idx, (lr, epochs) in enumerate(points):
        run_seed = config.seed + idx
        run_gat = gat_params.thaw() if config.finetune_gat else None
        run_chords = (np.array(chord_table.input_vectors, dtype=np.float64)
                      if config.finetune_chords else None)
        if live:
            w, b = _fit_live(dataset, train_rows, cols, mean, scale, y_tr,
                             lr, epochs, config.batch_size, run_seed,
                             run_gat, run_chords)
        else:
            w, b = _fit_frozen(x_std, y_tr, lr, epochs, config.batch_size,
                               run_seed)
        clf = FusionClassifier(weights=w, bias=b, mean=mean, scale=scale,
                               cols=cols, block_names=names)
        proba = predict(dataset, clf, val_rows, run_gat, run_chords)
        f1 = evaluate(proba >= THRESHOLD, y_val > 0.5).f1
        history.append((lr, epochs, f1))
        if best is None or f1 > best[0]:
            best = (f1, clf, lr, epochs, run_gat, run_chords)

    f1, clf, lr, epochs, run_gat, run_chords = best
    return TrainResult(
        classifier=clf, grid_lr=lr, grid_epochs=epochs, val_f1=f1,
        grid_history=history, degenerate=degenerate,
        gat_params=run_gat, chord_matrix=run_chords,
    )
