from .model import Corpus, LyricLine, Song, SplitAssignment, corpus_stats, split_corpus
from .lrc import parse_lrc, serialize_lrc
from .annotations import load_chords, load_labels
from .tokenize import tokenize
from .synth import SynthConfig, synth_corpus
from .io import load_corpus_dir, save_corpus_dir

__all__ = [
    "Corpus",
    "LyricLine",
    "Song",
    "SplitAssignment",
    "SynthConfig",
    "corpus_stats",
    "load_chords",
    "load_corpus_dir",
    "load_labels",
    "parse_lrc",
    "save_corpus_dir",
    "serialize_lrc",
    "split_corpus",
    "synth_corpus",
    "tokenize",
]
