import numpy as np
import pytest

from choruskit.corpus import (
    Corpus, SynthConfig, corpus_stats, load_chords, load_labels, split_corpus,
    synth_corpus, tokenize,
)
from choruskit.corpus.io import load_corpus_dir, save_corpus_dir
from choruskit.dsp import slice_line_audio
from choruskit.errors import DataError, RowError

from conftest import make_song


def _corpus(n_songs=10, n_lines=4):
    songs = tuple(
        make_song(f"s{i:03d}", [f"line {j} of {i}" for j in range(n_lines)])
        for i in range(n_songs)
    )
    return Corpus(songs=songs)


class TestLabels:
    def test_attach(self):
        c = load_labels("s000\t0\t1\ns000\t1\t0\n", _corpus())
        assert c.songs[0].lines[0].label is True
        assert c.songs[0].lines[1].label is False
        assert c.songs[0].lines[2].label is None

    def test_unknown_song(self):
        with pytest.raises(RowError, match="row 1"):
            load_labels("nope\t0\t1\n", _corpus())

    def test_out_of_range_index(self):
        with pytest.raises(RowError, match="row 2"):
            load_labels("s000\t0\t1\ns000\t99\t1\n", _corpus())

    def test_bad_value(self):
        with pytest.raises(RowError, match="0 or 1"):
            load_labels("s000\t0\t2\n", _corpus())

    def test_empty_file_noop(self):
        base = _corpus()
        assert load_labels("", base) is base


class TestChords:
    def test_attach(self):
        c = load_chords("s000\t0\tC Am G7\n", _corpus())
        assert c.songs[0].chords[0] == ("C", "Am", "G7")
        assert c.songs[0].chords[1] == ()

    def test_bad_index(self):
        with pytest.raises(RowError):
            load_chords("s000\t44\tC\n", _corpus())


class TestSplit:
    def test_counts_10_songs(self):
        split = split_corpus(_corpus(10), (0.8, 0.1, 0.1), seed=7)
        parts = list(split.by_song.values())
        assert parts.count("train") == 8
        assert parts.count("validation") == 1
        assert parts.count("test") == 1

    def test_deterministic(self):
        c = _corpus(10)
        a = split_corpus(c, (0.8, 0.1, 0.1), seed=3)
        b = split_corpus(c, (0.8, 0.1, 0.1), seed=3)
        assert a.by_song == b.by_song

    def test_partition(self):
        c = _corpus(17)
        split = split_corpus(c, (0.6, 0.2, 0.2), seed=1)
        assert set(split.by_song) == {s.id for s in c.songs}

    def test_chord_sized_counts_floor_rule(self):
        # frozen from the floor rule: val = floor(62.7) = 62,
        # test = floor(62.7) = 62, remainder 503 to train
        split = split_corpus(_corpus(627, n_lines=1), (0.8, 0.1, 0.1), seed=5)
        parts = list(split.by_song.values())
        assert parts.count("train") == 503
        assert parts.count("validation") == 62
        assert parts.count("test") == 62

    def test_too_few_songs(self):
        with pytest.raises(DataError):
            split_corpus(_corpus(2), (0.8, 0.1, 0.1), seed=0)

    def test_bad_ratios(self):
        with pytest.raises(DataError):
            split_corpus(_corpus(5), (0.8, 0.1, 0.2), seed=0)


class TestStats:
    def test_chord_shaped_mean(self):
        # 627 songs totaling 27,067 lines reproduce the 43.17 mean
        counts = [43] * 627
        for i in range(27_067 - 43 * 627):
            counts[i] += 1
        songs = tuple(
            make_song(f"s{i:04d}", [f"l{j}" for j in range(c)])
            for i, c in enumerate(counts)
        )
        stats = corpus_stats(Corpus(songs=songs))
        assert stats.lines == 27_067
        assert stats.mean_lines_per_song == 43.17

    def test_small(self):
        stats = corpus_stats(Corpus(songs=(make_song("a", ["w x y z"] * 4),)))
        assert stats.mean_lines_per_song == 4.00

    def test_empty(self):
        stats = corpus_stats(Corpus(songs=()))
        assert (stats.songs, stats.lines) == (0, 0)
        assert stats.mean_lines_per_song == 0.0
        assert stats.chorus_fraction == 0.0


class TestTokenize:
    def test_lower_and_punct(self):
        assert tokenize("Hello, World! don't") == ["hello", "world", "don", "t"]

    def test_cjk_per_character(self):
        assert tokenize("我爱abc你") == ["我", "爱", "abc", "你"]

    def test_digits_kept(self):
        assert tokenize("v07 k12") == ["v07", "k12"]


class TestSynth:
    def test_label_fraction_exact(self):
        cfg = SynthConfig(songs=2, lines_per_song=12, chorus_block=4,
                          chorus_repeats=2)
        corpus = synth_corpus(cfg, seed=3)
        for song in corpus.songs:
            assert sum(1 for ln in song.lines if ln.label) == 8
            assert len(song.lines) == 12

    def test_deterministic(self):
        cfg = SynthConfig(songs=3)
        a = synth_corpus(cfg, seed=9)
        b = synth_corpus(cfg, seed=9)
        for sa, sb in zip(a.songs, b.songs):
            assert sa.lines == sb.lines
            assert sa.chords == sb.chords
            assert np.array_equal(sa.audio.samples, sb.audio.samples)

    def test_chorus_rms_louder(self):
        corpus = synth_corpus(SynthConfig(songs=4), seed=2)
        for song in corpus.songs:
            chorus, verse = [], []
            for ln in song.lines:
                clip = slice_line_audio(song.audio, ln)
                rms = float(np.sqrt(np.mean(clip.samples ** 2)))
                (chorus if ln.label else verse).append(rms)
            assert min(chorus) > max(verse)

    def test_block_must_fit(self):
        with pytest.raises(DataError):
            SynthConfig(songs=1, lines_per_song=6, chorus_block=8)
        with pytest.raises(DataError):
            SynthConfig(songs=1, lines_per_song=6, chorus_block=3,
                        chorus_repeats=3)
        with pytest.raises(DataError):
            SynthConfig(songs=1, chorus_repeats=1)

    def test_chorus_block_repeats_verbatim(self):
        corpus = synth_corpus(SynthConfig(songs=3), seed=5)
        for song in corpus.songs:
            chorus_texts = [ln.text for ln in song.lines if ln.label]
            block = len(chorus_texts) // 2
            assert chorus_texts[:block] == chorus_texts[block:]

    def test_chorus_loop_distinct(self):
        from collections import Counter
        corpus = synth_corpus(SynthConfig(songs=3), seed=5)
        for song in corpus.songs:
            chorus_loops = {song.chords[ln.index] for ln in song.lines if ln.label}
            assert len(chorus_loops) == 1
            # the dominant verse loop must differ from the chorus loop
            # (a minority of verse lines intentionally tease the chorus loop)
            verse_counts = Counter(
                song.chords[ln.index] for ln in song.lines if not ln.label
            )
            assert verse_counts.most_common(1)[0][0] not in chorus_loops


def test_corpus_dir_round_trip(tmp_path, small_corpus):
    save_corpus_dir(small_corpus, tmp_path)
    loaded = load_corpus_dir(tmp_path)
    assert len(loaded.songs) == len(small_corpus.songs)
    for a, b in zip(loaded.songs, small_corpus.songs):
        assert a.id == b.id
        assert [ln.text for ln in a.lines] == [ln.text for ln in b.lines]
        assert [ln.start_ms for ln in a.lines] == [ln.start_ms for ln in b.lines]
        assert [ln.label for ln in a.lines] == [ln.label for ln in b.lines]
        assert a.chords == b.chords
        assert isinstance(a.audio, str)
