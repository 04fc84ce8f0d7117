"""Per-song heterogeneous graph: sentence, word, and chord nodes joined by
containment edges weighted with per-song TF-IDF values.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

import numpy as np

from ..corpus.model import Corpus, Song
from ..corpus.tokenize import tokenize
from ..errors import DataError
from ..textrep import WordVocab, song_chord_tfidf, song_word_tfidf

N_CHORD_NODES = 12


@dataclass(frozen=True)
class HeteroGraph:
    """Canonical node order: sentences by line index, words and chords
    lexicographic, so construction is insertion-order independent.
    Edge arrays are parallel (target sentence, source node, feature).
    """

    song_id: str
    sent_base: np.ndarray  # (n_sent, d_s)
    words: tuple[str, ...]
    word_base: np.ndarray  # (n_word, d_word)
    chords: tuple[str, ...]
    chord_base: np.ndarray  # (n_chord, d_chord)
    sw_sent: np.ndarray  # (m_sw,) int
    sw_word: np.ndarray
    sw_feat: np.ndarray  # (m_sw,) float
    sc_sent: np.ndarray
    sc_chord: np.ndarray
    sc_feat: np.ndarray

    @property
    def n_sent(self) -> int:
        return self.sent_base.shape[0]


def top_chords(corpus: Corpus, limit: int = N_CHORD_NODES) -> tuple[str, ...]:
    """The ``limit`` most frequent chord symbols corpus-wide, ties lexicographic."""
    counts = Counter()
    for song in corpus.songs:
        if song.chords:
            for seq in song.chords:
                counts.update(seq)
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return tuple(sym for sym, _ in ranked[:limit])


def build_graph(
    song: Song,
    word_vocab: WordVocab,
    chord_nodes: tuple[str, ...],
    sent_base: np.ndarray,
    word_table,
    chord_table,
) -> HeteroGraph:
    """Assemble the song graph.

    ``sent_base`` carries one encoder vector per line; word and chord node
    vectors come from the supplied tables. Edge features are this song's
    TF-IDF weights (words over lines, chords over line chord sequences).
    """
    n = len(song.lines)
    if sent_base.shape[0] != n:
        raise DataError(
            f"song {song.id}: {sent_base.shape[0]} base vectors for {n} lines"
        )

    line_tokens = [tokenize(ln.text) for ln in song.lines]
    words = sorted({t for toks in line_tokens for t in toks if t in word_vocab})
    word_idx = {w: i for i, w in enumerate(words)}
    chord_set = set(chord_nodes)
    present = sorted({
        c for i in range(n) for c in song.line_chords(i) if c in chord_set
    })
    chord_idx = {c: i for i, c in enumerate(present)}

    wt = song_word_tfidf(song)
    ct = song_chord_tfidf(song)

    sw = []
    for i, toks in enumerate(line_tokens):
        for w in sorted(set(toks)):
            if w in word_idx:
                sw.append((i, word_idx[w], wt.weight(w, i)))
    sc = []
    for i in range(n):
        for c in sorted(set(song.line_chords(i))):
            if c in chord_idx:
                sc.append((i, chord_idx[c], ct.weight(c, i)))

    word_base = (
        np.stack([word_table.vector(w) for w in words])
        if words else np.zeros((0, word_table.dim))
    )
    chord_base = (
        np.stack([chord_table.vector(c) for c in present])
        if present else np.zeros((0, chord_table.dim))
    )

    def _cols(rows, k):
        return (np.array([r[k] for r in rows], dtype=np.int64)
                if k < 2 else np.array([r[k] for r in rows], dtype=np.float64))

    return HeteroGraph(
        song_id=song.id,
        sent_base=np.asarray(sent_base, dtype=np.float64),
        words=tuple(words),
        word_base=word_base.astype(np.float64),
        chords=tuple(present),
        chord_base=chord_base.astype(np.float64),
        sw_sent=_cols(sw, 0) if sw else np.zeros(0, dtype=np.int64),
        sw_word=_cols(sw, 1) if sw else np.zeros(0, dtype=np.int64),
        sw_feat=_cols(sw, 2) if sw else np.zeros(0),
        sc_sent=_cols(sc, 0) if sc else np.zeros(0, dtype=np.int64),
        sc_chord=_cols(sc, 1) if sc else np.zeros(0, dtype=np.int64),
        sc_feat=_cols(sc, 2) if sc else np.zeros(0),
    )
