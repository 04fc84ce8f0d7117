"""Chorus-aware keyword search: an n-gram inverted index whose postings
carry per-line chorus probabilities, ranked either by maximum chorus
probability or by an average TF-IDF baseline at song granularity.
"""

from __future__ import annotations

import math
import struct
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .corpus.model import Corpus, Song
from .corpus.tokenize import tokenize
from .errors import DataError

GRAM_SIZES = (3, 4)
CHORUS_THRESHOLD = 0.5

Posting = tuple[str, int, float]  # song id, line index, chorus probability


def line_ngrams(tokens: Sequence[str]) -> set[str]:
    """Distinct 3- and 4-grams of a token sequence, space-joined."""
    grams = set()
    for n in GRAM_SIZES:
        for i in range(len(tokens) - n + 1):
            grams.add(" ".join(tokens[i:i + n]))
    return grams


@dataclass
class NGramIndex:
    grams: dict[str, list[Posting]] = field(default_factory=dict)
    song_tokens: dict[str, Counter] = field(default_factory=dict)

    @property
    def n_songs(self) -> int:
        return len(self.song_tokens)

    @property
    def posting_count(self) -> int:
        return sum(len(p) for p in self.grams.values())

    def songs_containing(self, token: str) -> int:
        return sum(1 for counts in self.song_tokens.values() if token in counts)


def build_index(corpus: Corpus,
                predictions: dict[tuple[str, int], float]) -> NGramIndex:
    """Index every line's 3/4-grams with its chorus probability.

    Every line must have a prediction; duplicate n-grams within one line
    collapse to a single posting.
    """
    index = NGramIndex()
    for song in corpus.songs:
        counts: Counter = Counter()
        for ln in song.lines:
            key = (song.id, ln.index)
            if key not in predictions:
                raise DataError(
                    f"missing chorus prediction for {song.id}:{ln.index}"
                )
            prob = predictions[key]
            if not 0.0 <= prob <= 1.0:
                raise DataError(
                    f"probability {prob} outside [0, 1] for {song.id}:{ln.index}"
                )
            tokens = tokenize(ln.text)
            counts.update(tokens)
            for gram in line_ngrams(tokens):
                index.grams.setdefault(gram, []).append(
                    (song.id, ln.index, prob)
                )
        index.song_tokens[song.id] = counts
    for postings in index.grams.values():
        postings.sort(key=lambda p: (p[0], p[1]))
    return index


@dataclass(frozen=True)
class RankedSong:
    rank: int
    song_id: str
    score: float
    line_index: int


@dataclass(frozen=True)
class QueryResult:
    keyword: str
    entries: tuple[RankedSong, ...]

    def rank_of(self, song_id: str) -> int | None:
        for e in self.entries:
            if e.song_id == song_id:
                return e.rank
        return None


def _keyword_gram(keyword: str) -> str:
    tokens = tokenize(keyword)
    if len(tokens) not in GRAM_SIZES:
        raise DataError(
            f"keyword must tokenize to 3 or 4 words, got {len(tokens)}"
        )
    return " ".join(tokens)


def _ranked(scored: dict[str, tuple[float, int]], keyword: str,
            k: int) -> QueryResult:
    order = sorted(scored.items(), key=lambda kv: (-kv[1][0], kv[0]))
    entries = tuple(
        RankedSong(rank=r + 1, song_id=sid, score=score, line_index=line)
        for r, (sid, (score, line)) in enumerate(order[:k])
    )
    return QueryResult(keyword=keyword, entries=entries)


def query_chorus(index: NGramIndex, keyword: str, k: int = 10) -> QueryResult:
    """Rank matching songs by their best matching line's chorus probability."""
    gram = _keyword_gram(keyword)
    scored: dict[str, tuple[float, int]] = {}
    for sid, line, prob in index.grams.get(gram, []):
        cur = scored.get(sid)
        if cur is None or prob > cur[0] or (prob == cur[0] and line < cur[1]):
            scored[sid] = (prob, line)
    return _ranked(scored, keyword, k)


def query_tfidf(index: NGramIndex, keyword: str, k: int = 10) -> QueryResult:
    """Rank matching songs by the keyword tokens' mean TF-IDF in each song.

    TF counts occurrences in the whole song; IDF is ln(songs / songs
    containing the token).
    """
    gram = _keyword_gram(keyword)
    tokens = gram.split(" ")
    idf = {
        t: (math.log(index.n_songs / df) if (df := index.songs_containing(t))
            else 0.0)
        for t in set(tokens)
    }
    scored: dict[str, tuple[float, int]] = {}
    for sid, line, _ in index.grams.get(gram, []):
        if sid in scored:
            scored[sid] = (scored[sid][0], min(scored[sid][1], line))
            continue
        counts = index.song_tokens[sid]
        score = sum(counts.get(t, 0) * idf[t] for t in tokens) / len(tokens)
        scored[sid] = (score, line)
    return _ranked(scored, keyword, k)


def candidate_keywords(song: Song, corpus: Corpus,
                       predictions: dict[tuple[str, int], float]) -> list[str]:
    """Keywords usable to search for ``song``: n-grams of its predicted
    chorus lines that also occur in predicted non-chorus lines of at least
    two other songs."""
    chorus_grams = set()
    for ln in song.lines:
        if predictions[(song.id, ln.index)] >= CHORUS_THRESHOLD:
            chorus_grams |= line_ngrams(tokenize(ln.text))
    if not chorus_grams:
        return []
    seen_in: dict[str, set[str]] = defaultdict(set)
    for other in corpus.songs:
        if other.id == song.id:
            continue
        for ln in other.lines:
            if predictions[(other.id, ln.index)] >= CHORUS_THRESHOLD:
                continue
            for gram in line_ngrams(tokenize(ln.text)) & chorus_grams:
                seen_in[gram].add(other.id)
    return sorted(g for g, songs in seen_in.items() if len(songs) >= 2)


def generate_queries(corpus: Corpus,
                     predictions: dict[tuple[str, int], float],
                     per_song: int = 2) -> list[tuple[str, str]]:
    """Deterministic (keyword, target song) pairs from candidate keywords."""
    queries = []
    for song in corpus.songs:
        for kw in candidate_keywords(song, corpus, predictions)[:per_song]:
            queries.append((kw, song.id))
    return queries


@dataclass(frozen=True)
class SearchEvalReport:
    hits: dict[int, float]
    n_queries: int


def eval_hits(index: NGramIndex, queries: Sequence[tuple[str, str]],
              method: str, ks: Iterable[int] = (1, 3)) -> SearchEvalReport:
    """Fraction of queries whose target lands in the top k, per k."""
    if not queries:
        raise DataError("no queries to evaluate")
    ks = sorted(ks)
    query_fn = {"chorus": query_chorus, "tfidf": query_tfidf}.get(method)
    if query_fn is None:
        raise DataError(f"unknown search method {method!r}")
    hits = {k: 0 for k in ks}
    for keyword, target in queries:
        result = query_fn(index, keyword, k=max(ks))
        rank = result.rank_of(target)
        if rank is not None:
            for k in ks:
                if rank <= k:
                    hits[k] += 1
    return SearchEvalReport(
        hits={k: hits[k] / len(queries) for k in ks},
        n_queries=len(queries),
    )


_MAGIC = b"NGX1"


def save_index(path, index: NGramIndex) -> None:
    """Sorted flat snapshot: song token stats then gram postings."""
    def _pack_str(s: str) -> bytes:
        raw = s.encode("utf-8")
        return struct.pack("<H", len(raw)) + raw

    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<I", len(index.song_tokens)))
        for sid in sorted(index.song_tokens):
            counts = index.song_tokens[sid]
            fh.write(_pack_str(sid))
            fh.write(struct.pack("<I", len(counts)))
            for token in sorted(counts):
                fh.write(_pack_str(token))
                fh.write(struct.pack("<I", counts[token]))
        fh.write(struct.pack("<I", len(index.grams)))
        for gram in sorted(index.grams):
            fh.write(_pack_str(gram))
            postings = index.grams[gram]
            fh.write(struct.pack("<I", len(postings)))
            for sid, line, prob in postings:
                fh.write(_pack_str(sid))
                fh.write(struct.pack("<Id", line, prob))


def load_index(path) -> NGramIndex:
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:4] != _MAGIC:
        raise DataError(f"{path}: not an {_MAGIC.decode()} index snapshot")
    pos = 4

    def _u(fmt):
        nonlocal pos
        size = struct.calcsize(fmt)
        vals = struct.unpack_from(fmt, data, pos)
        pos += size
        return vals

    def _s() -> str:
        nonlocal pos
        (n,) = _u("<H")
        raw = data[pos:pos + n]
        pos += n
        return raw.decode("utf-8")

    index = NGramIndex()
    (n_songs,) = _u("<I")
    for _ in range(n_songs):
        sid = _s()
        (n_tokens,) = _u("<I")
        counts = Counter()
        for _ in range(n_tokens):
            token = _s()
            (count,) = _u("<I")
            counts[token] = count
        index.song_tokens[sid] = counts
    (n_grams,) = _u("<I")
    for _ in range(n_grams):
        gram = _s()
        (n_post,) = _u("<I")
        postings = []
        for _ in range(n_post):
            sid = _s()
            line, prob = _u("<Id")
            postings.append((sid, line, prob))
        index.grams[gram] = postings
    return index
