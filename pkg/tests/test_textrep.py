import math

import numpy as np
import pytest

from choruskit.corpus.model import Corpus
from choruskit.errors import DataError, MissingEmbeddingError
from choruskit.textrep import (
    EmbeddingStore, MeanWordEncoder, PrecomputedEncoder, WordEmbeddingTable,
    build_vocab, corpus_tfidf, load_embedding_store, load_word_table,
    random_word_table, save_embedding_store, save_word_table,
)

from conftest import make_song


def _corpus(texts_by_song: dict[str, list[str]]) -> Corpus:
    return Corpus(songs=tuple(
        make_song(sid, texts) for sid, texts in sorted(texts_by_song.items())
    ))


class TestTfidf:
    def test_word_in_every_sentence_scores_zero(self):
        corpus = _corpus({"a": ["the cat", "the dog", "the fox", "the owl"]})
        model = corpus_tfidf(corpus)
        assert model.weight("the", ("a", 0)) == 0.0
        assert model.max_weight("the") == 0.0

    def test_rare_word_log_n(self):
        texts = {"a": ["zebra one", "two three", "four five", "six seven"],
                 "b": ["eight nine", "ten eleven", "twelve x", "y z"]}
        model = corpus_tfidf(_corpus(texts))
        # 8 sentences, zebra once in one of them
        assert model.weight("zebra", ("a", 0)) == pytest.approx(math.log(8))

    def test_tf_scales(self):
        corpus = _corpus({"a": ["go go go", "stop"]})
        model = corpus_tfidf(corpus)
        assert model.weight("go", ("a", 0)) == pytest.approx(3 * math.log(2))

    def test_zero_iff_absent_or_everywhere(self):
        corpus = _corpus({"a": ["p q", "p r", "p s"]})
        model = corpus_tfidf(corpus)
        for term in ("p", "q", "r", "s", "missing"):
            w = model.max_weight(term)
            everywhere = model.outdeg(term) == model.n_docs
            absent = model.outdeg(term) == 0
            assert (w == 0.0) == (everywhere or absent)


class TestVocab:
    def test_ten_percent_floor_drop(self):
        # 10 distinct words -> exactly 1 dropped
        texts = {"a": [f"w{i} common" for i in range(9)]}
        corpus = _corpus(texts)
        vocab, _ = build_vocab(corpus)
        total_words = 10
        assert vocab.size == total_words - 1
        assert "common" not in vocab  # idf 0 everywhere -> lowest score

    def test_cap(self):
        texts = {"a": [f"u{i:02d} v{i:02d}" for i in range(20)]}
        vocab, _ = build_vocab(_corpus(texts), max_size=5)
        assert vocab.size == 5

    def test_deterministic_tie_break(self):
        texts = {"a": ["aa bb", "cc dd", "ee ff", "gg hh", "ii jj"]}
        v1, _ = build_vocab(_corpus(texts))
        v2, _ = build_vocab(_corpus(texts))
        assert v1.ids == v2.ids
        # all words tie; the lexicographically first is dropped
        assert "aa" not in v1

    def test_empty_corpus(self):
        with pytest.raises(DataError):
            build_vocab(Corpus(songs=()))


class TestEncoders:
    def _table(self):
        return WordEmbeddingTable(
            {"up": np.full(300, 1.0), "down": np.full(300, -1.0),
             "left": np.arange(300, dtype=float)},
        )

    def test_single_word_identity(self):
        enc = MeanWordEncoder(self._table())
        line = make_song("s", ["up"]).lines[0]
        assert np.array_equal(enc.encode("s", line), np.full(300, 1.0))

    def test_opposite_words_cancel(self):
        enc = MeanWordEncoder(self._table())
        line = make_song("s", ["up down"]).lines[0]
        assert np.array_equal(enc.encode("s", line), np.zeros(300))

    def test_oov_skipped(self):
        enc = MeanWordEncoder(self._table())
        line = make_song("s", ["up down left banana"]).lines[0]
        expected = (np.full(300, 1.0) + np.full(300, -1.0)
                    + np.arange(300)) / 3
        assert np.allclose(enc.encode("s", line), expected)

    def test_all_oov_is_zero(self):
        enc = MeanWordEncoder(self._table())
        line = make_song("s", ["banana split"]).lines[0]
        assert np.array_equal(enc.encode("s", line), np.zeros(300))

    def test_pure(self):
        enc = MeanWordEncoder(self._table())
        line = make_song("s", ["up left"]).lines[0]
        a = enc.encode("s", line)
        b = enc.encode("s", line)
        assert np.array_equal(a, b)


class TestStore:
    def test_lookup_and_missing(self, tmp_path):
        store = EmbeddingStore(
            {"s1:0": np.array([1.0, 2.0]), "s1:1": np.array([3.0, 4.0])}, dim=2)
        enc = PrecomputedEncoder(store)
        line0 = make_song("s1", ["a", "b"]).lines[0]
        assert np.array_equal(enc.encode("s1", line0), np.array([1.0, 2.0]))
        with pytest.raises(MissingEmbeddingError, match="s2:0"):
            enc.encode("s2", line0)

    def test_round_trip_bit_exact(self, tmp_path):
        rng = np.random.default_rng(0)
        vectors = {
            f"song:{i}": rng.standard_normal(17).astype(np.float32).astype(float)
            for i in range(100)
        }
        store = EmbeddingStore(vectors, dim=17)
        path = tmp_path / "store.txt"
        save_embedding_store(path, store)
        again = load_embedding_store(path)
        assert again.dim == 17
        for key, vec in vectors.items():
            diff = np.max(np.abs(
                again.vector(key).astype(np.float32)
                - vec.astype(np.float32)
            ))
            assert diff == 0.0

    def test_header(self, tmp_path):
        path = tmp_path / "store.txt"
        save_embedding_store(
            path, EmbeddingStore({"a:0": np.zeros(3)}, dim=3))
        assert path.read_text().splitlines()[0] == "1 3"


class TestRandomTable:
    def test_order_independent(self):
        a = random_word_table(["x", "y"], dim=16, seed=3)
        b = random_word_table(["y", "x"], dim=16, seed=3)
        assert np.array_equal(a.vector("x"), b.vector("x"))

    def test_seed_matters(self):
        a = random_word_table(["x"], dim=16, seed=3)
        b = random_word_table(["x"], dim=16, seed=4)
        assert not np.array_equal(a.vector("x"), b.vector("x"))

    def test_unit_norm_and_round_trip(self, tmp_path):
        table = random_word_table(["alpha", "beta"], dim=32, seed=1)
        assert np.linalg.norm(table.vector("alpha")) == pytest.approx(1.0)
        path = tmp_path / "words.txt"
        save_word_table(path, table)
        again = load_word_table(path)
        assert np.max(np.abs(
            again.vector("beta") - table.vector("beta").astype(np.float32)
        )) == 0.0
