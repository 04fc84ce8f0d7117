"""Text-side representations: TF-IDF weights, the pruned word vocabulary,
word-embedding tables, and pluggable sentence encoders.

The interchange file format (``count dim`` header, then ``key f1 ... f_dim``
rows keyed ``song_id:line_index``) is shared with the offline transformer
exporter; the mean-word encoder is the dependency-free stand-in.
"""

from __future__ import annotations

import hashlib
import math
from collections import Counter
from dataclasses import dataclass
from typing import Hashable, Iterable, Sequence

import numpy as np

from .corpus.model import Corpus, LyricLine, Song
from .corpus.tokenize import tokenize
from .errors import DataError, MissingEmbeddingError

WORD_DIM = 300
MAX_VOCAB = 50_000
LOW_TFIDF_DROP = 0.10


class TfidfModel:
    """Term frequencies per document plus out-degrees.

    ``weight(term, key) = TF(term, doc) * ln(N / outdeg(term))`` where the
    out-degree is the number of distinct documents containing the term.
    """

    def __init__(self, docs: Iterable[tuple[Hashable, Sequence[str]]]):
        self.tf: dict[str, dict[Hashable, int]] = {}
        self.n_docs = 0
        for key, tokens in docs:
            self.n_docs += 1
            for term, count in Counter(tokens).items():
                self.tf.setdefault(term, {})[key] = count

    def outdeg(self, term: str) -> int:
        return len(self.tf.get(term, {}))

    def idf(self, term: str) -> float:
        deg = self.outdeg(term)
        return math.log(self.n_docs / deg) if deg else 0.0

    def weight(self, term: str, key: Hashable) -> float:
        count = self.tf.get(term, {}).get(key, 0)
        return count * self.idf(term)

    def max_weight(self, term: str) -> float:
        docs = self.tf.get(term, {})
        if not docs:
            return 0.0
        return max(docs.values()) * self.idf(term)

    @property
    def terms(self) -> Iterable[str]:
        return self.tf.keys()


def corpus_tfidf(corpus: Corpus) -> TfidfModel:
    """Corpus-wide model with one document per lyric line."""
    return TfidfModel(
        ((song.id, ln.index), tokenize(ln.text))
        for song in corpus.songs
        for ln in song.lines
    )


def song_word_tfidf(song: Song) -> TfidfModel:
    """Per-song model: documents are this song's lines only."""
    return TfidfModel((ln.index, tokenize(ln.text)) for ln in song.lines)


def song_chord_tfidf(song: Song) -> TfidfModel:
    """Per-song model over chord sequences instead of words."""
    return TfidfModel(
        (i, song.line_chords(i)) for i in range(len(song.lines))
    )


@dataclass(frozen=True)
class WordVocab:
    ids: dict[str, int]

    def __contains__(self, word: str) -> bool:
        return word in self.ids

    @property
    def size(self) -> int:
        return len(self.ids)

    @property
    def words(self) -> list[str]:
        ordered = [None] * len(self.ids)
        for w, i in self.ids.items():
            ordered[i] = w
        return ordered


def build_vocab(
    corpus: Corpus, max_size: int = MAX_VOCAB, drop_fraction: float = LOW_TFIDF_DROP
) -> tuple[WordVocab, TfidfModel]:
    """Corpus vocabulary after dropping the lowest-TF-IDF tail.

    A word's score is its maximum TF-IDF over all lines; the bottom
    ``floor(drop_fraction * vocab)`` words go first (ties lexicographic),
    then the top ``max_size`` survivors are kept by descending score.
    """
    model = corpus_tfidf(corpus)
    if model.n_docs == 0:
        raise DataError("empty corpus")
    scored = sorted(
        ((model.max_weight(w), w) for w in model.terms),
        key=lambda sw: (sw[0], sw[1]),
    )
    n_drop = int(len(scored) * drop_fraction)
    kept = scored[n_drop:]
    kept.sort(key=lambda sw: (-sw[0], sw[1]))
    ids = {w: i for i, (_, w) in enumerate(kept[:max_size])}
    return WordVocab(ids=ids), model


class WordEmbeddingTable:
    """word2vec-text table; out-of-vocabulary words map to the zero vector."""

    def __init__(self, vectors: dict[str, np.ndarray], dim: int = WORD_DIM):
        self.dim = dim
        self.vectors = vectors
        for w, v in vectors.items():
            if v.shape != (dim,):
                raise DataError(f"vector for {w!r} has shape {v.shape}, want ({dim},)")

    def __contains__(self, word: str) -> bool:
        return word in self.vectors

    def vector(self, word: str) -> np.ndarray:
        vec = self.vectors.get(word)
        return vec if vec is not None else np.zeros(self.dim)


def random_word_table(words: Iterable[str], dim: int = WORD_DIM, seed: int = 0
                      ) -> WordEmbeddingTable:
    """Unit-norm random vectors, a GloVe stand-in for synthetic corpora.

    Each vector depends only on (word, seed), not on iteration order.
    """
    vectors = {}
    for word in words:
        digest = hashlib.blake2s(f"{seed}:{word}".encode()).digest()
        rng = np.random.default_rng(int.from_bytes(digest[:8], "little"))
        v = rng.standard_normal(dim)
        vectors[word] = v / np.linalg.norm(v)
    return WordEmbeddingTable(vectors, dim=dim)


def save_word_table(path, table: WordEmbeddingTable) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"{len(table.vectors)} {table.dim}\n")
        for word in sorted(table.vectors):
            vec = table.vectors[word].astype(np.float32)
            fh.write(word + " " + " ".join(f"{v:.9g}" for v in vec) + "\n")


def load_word_table(path) -> WordEmbeddingTable:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise DataError(f"{path}: bad word table header")
        count, dim = int(header[0]), int(header[1])
        vectors = {}
        for i in range(count):
            parts = fh.readline().split()
            if len(parts) != dim + 1:
                raise DataError(f"{path}: bad row {i + 2}")
            vectors[parts[0]] = np.array([np.float32(p) for p in parts[1:]],
                                         dtype=np.float64)
    return WordEmbeddingTable(vectors, dim=dim)


class EmbeddingStore:
    """Per-line sentence vectors keyed ``song_id:line_index``."""

    def __init__(self, vectors: dict[str, np.ndarray], dim: int):
        self.vectors = vectors
        self.dim = dim

    def vector(self, key: str) -> np.ndarray:
        try:
            return self.vectors[key]
        except KeyError:
            raise MissingEmbeddingError(key) from None


def save_embedding_store(path, store: EmbeddingStore) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"{len(store.vectors)} {store.dim}\n")
        for key in sorted(store.vectors):
            vec = store.vectors[key].astype(np.float32)
            fh.write(key + " " + " ".join(f"{v:.9g}" for v in vec) + "\n")


def load_embedding_store(path) -> EmbeddingStore:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise DataError(f"{path}: bad embedding store header")
        count, dim = int(header[0]), int(header[1])
        vectors = {}
        for i in range(count):
            parts = fh.readline().split()
            if len(parts) != dim + 1:
                raise DataError(f"{path}: bad row {i + 2}")
            vectors[parts[0]] = np.array([np.float32(p) for p in parts[1:]],
                                         dtype=np.float64)
    return EmbeddingStore(vectors, dim=dim)


class MeanWordEncoder:
    """Mean of in-table word vectors; all-OOV lines encode to zero."""

    def __init__(self, table: WordEmbeddingTable):
        self.table = table
        self.dim = table.dim

    def encode(self, song_id: str, line: LyricLine) -> np.ndarray:
        vecs = [self.table.vector(t) for t in tokenize(line.text) if t in self.table]
        if not vecs:
            return np.zeros(self.dim)
        return np.mean(vecs, axis=0)


class PrecomputedEncoder:
    """Looks lines up in an interchange store; missing keys are errors."""

    def __init__(self, store: EmbeddingStore):
        self.store = store
        self.dim = store.dim

    def encode(self, song_id: str, line: LyricLine) -> np.ndarray:
        return self.store.vector(f"{song_id}:{line.index}")
