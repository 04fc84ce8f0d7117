"""Chord embeddings: frequency-capped vocabulary, skip-gram training with
negative sampling, and per-line chord feature assembly.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy.special import expit, log_expit

from .errors import DataError

UNK = "<unk>"
EMBED_DIM = 64
MAX_LINE_CHORDS = 16


@dataclass(frozen=True)
class ChordVocab:
    ids: dict[str, int]

    @property
    def size(self) -> int:
        return len(self.ids)

    def id_of(self, symbol: str) -> int:
        return self.ids.get(symbol, self.ids[UNK])

    @property
    def symbols(self) -> list[str]:
        ordered = [None] * len(self.ids)
        for sym, i in self.ids.items():
            ordered[i] = sym
        return ordered


def build_chord_vocab(
    sequences: Iterable[Sequence[str]], max_size: int = 500
) -> ChordVocab:
    """Top ``max_size - 1`` symbols by frequency plus ``<unk>``.

    Frequency ties break lexicographically.
    """
    counts = Counter()
    for seq in sequences:
        counts.update(seq)
    if not counts:
        raise DataError("no chords in corpus")
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    kept = [sym for sym, _ in ranked[: max_size - 1]]
    ids = {sym: i for i, sym in enumerate(kept)}
    ids[UNK] = len(ids)
    return ChordVocab(ids=ids)


@dataclass(frozen=True)
class SkipGramConfig:
    window: int = 2
    negatives: int = 5
    lr: float = 0.025
    epochs: int = 5
    seed: int = 0

    def __post_init__(self):
        if self.window < 1 or self.negatives < 1:
            raise DataError("window and negatives must be >= 1")


@dataclass
class ChordEmbeddingTable:
    vocab: ChordVocab
    input_vectors: np.ndarray  # (vocab, dim) center-word matrix
    output_vectors: Optional[np.ndarray] = None  # context matrix, None after load
    epoch_losses: list[float] = field(default_factory=list)

    @property
    def dim(self) -> int:
        return self.input_vectors.shape[1]

    def vector(self, symbol: str) -> np.ndarray:
        return self.input_vectors[self.vocab.id_of(symbol)]


def pair_loss_and_grads(v_c: np.ndarray, u_o: np.ndarray, u_neg: np.ndarray):
    """Negative-sampling loss for one (center, context, negatives) draw.

    Returns (loss, d_center, d_context, d_negatives); used directly by the
    trainer and by the finite-difference gradient suite.
    """
    pos_score = float(u_o @ v_c)
    neg_scores = u_neg @ v_c
    loss = -float(log_expit(pos_score)) - float(np.sum(log_expit(-neg_scores)))
    g_pos = expit(pos_score) - 1.0
    g_neg = expit(neg_scores)  # (n_neg,)
    d_center = g_pos * u_o + g_neg @ u_neg
    d_context = g_pos * v_c
    d_negatives = g_neg[:, None] * v_c[None, :]
    return loss, d_center, d_context, d_negatives


def count_training_pairs(sequences: Iterable[Sequence[str]], window: int) -> int:
    total = 0
    for seq in sequences:
        n = len(seq)
        for t in range(n):
            total += min(t + window, n - 1) - max(t - window, 0)
    return total


def init_table(vocab: ChordVocab, dim: int, seed: int) -> ChordEmbeddingTable:
    rng = np.random.default_rng(seed)
    inp = (rng.random((vocab.size, dim)) - 0.5) / dim
    out = np.zeros((vocab.size, dim))
    return ChordEmbeddingTable(vocab=vocab, input_vectors=inp, output_vectors=out)


def train_skipgram(
    sequences: list[Sequence[str]],
    vocab: ChordVocab,
    config: SkipGramConfig = SkipGramConfig(),
    dim: int = EMBED_DIM,
) -> ChordEmbeddingTable:
    """Skip-gram with negative sampling over chord sequences.

    Plain per-pair SGD with a linearly decaying learning rate; negatives
    come from the unigram distribution raised to 0.75. Fully deterministic
    for a fixed seed.
    """
    table = init_table(vocab, dim, config.seed)
    encoded = [[vocab.id_of(s) for s in seq] for seq in sequences]

    counts = np.zeros(vocab.size)
    for seq in encoded:
        for i in seq:
            counts[i] += 1
    weights = counts ** 0.75
    total_w = weights.sum()
    if total_w == 0:
        return table
    cumulative = np.cumsum(weights / total_w)

    pairs_per_epoch = count_training_pairs(sequences, config.window)
    if pairs_per_epoch == 0:
        return table
    total_pairs = pairs_per_epoch * config.epochs
    rng = np.random.default_rng(config.seed + 1)
    inp, out = table.input_vectors, table.output_vectors

    seen = 0
    for _ in range(config.epochs):
        epoch_loss = 0.0
        for seq in encoded:
            n = len(seq)
            for t in range(n):
                center = seq[t]
                for o in range(max(t - config.window, 0),
                               min(t + config.window, n - 1) + 1):
                    if o == t:
                        continue
                    context = seq[o]
                    lr = config.lr * max(1.0 - seen / total_pairs, 1e-4)
                    seen += 1
                    draws = np.searchsorted(
                        cumulative, rng.random(config.negatives)
                    )
                    negs = draws[draws != context]
                    loss, d_c, d_o, d_n = pair_loss_and_grads(
                        inp[center], out[context], out[negs]
                    )
                    epoch_loss += loss
                    inp[center] -= lr * d_c
                    out[context] -= lr * d_o
                    out[negs] -= lr * d_n
        table.epoch_losses.append(epoch_loss / pairs_per_epoch)
    return table


def chord_feature(
    sequence: Sequence[str],
    table: ChordEmbeddingTable,
    max_chords: int = MAX_LINE_CHORDS,
) -> np.ndarray:
    """Concatenated chord embeddings pruned/zero-padded to ``max_chords``."""
    dim = table.dim
    out = np.zeros(max_chords * dim)
    for k, symbol in enumerate(sequence[:max_chords]):
        out[k * dim:(k + 1) * dim] = table.vector(symbol)
    return out


def save_table(path, table: ChordEmbeddingTable) -> None:
    """word2vec-style text: ``count dim`` header then one symbol per line."""
    symbols = table.vocab.symbols
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"{table.vocab.size} {table.dim}\n")
        for i, sym in enumerate(symbols):
            vec = table.input_vectors[i].astype(np.float32)
            fh.write(sym + " " + " ".join(f"{v:.9g}" for v in vec) + "\n")


def load_table(path) -> ChordEmbeddingTable:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise DataError(f"{path}: bad embedding table header")
        count, dim = int(header[0]), int(header[1])
        ids = {}
        vectors = np.zeros((count, dim))
        for i in range(count):
            parts = fh.readline().split()
            if len(parts) != dim + 1:
                raise DataError(f"{path}: bad row {i + 2}")
            ids[parts[0]] = i
            vectors[i] = np.array([np.float32(p) for p in parts[1:]])
    if UNK not in ids:
        raise DataError(f"{path}: table is missing the {UNK} symbol")
    return ChordEmbeddingTable(vocab=ChordVocab(ids=ids), input_vectors=vectors)
