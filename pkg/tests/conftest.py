import pytest

from choruskit.corpus import SynthConfig, synth_corpus
from choruskit.corpus.model import Corpus, LyricLine, Song


def make_song(song_id: str, texts, labels=None, chords=None,
              line_ms: int = 1000) -> Song:
    lines = tuple(
        LyricLine(
            index=i, text=t, start_ms=i * line_ms, end_ms=(i + 1) * line_ms,
            label=None if labels is None else labels[i],
        )
        for i, t in enumerate(texts)
    )
    return Song(
        id=song_id, lines=lines,
        chords=tuple(tuple(c) for c in chords) if chords is not None else None,
    )


@pytest.fixture(scope="session")
def small_corpus() -> Corpus:
    return synth_corpus(SynthConfig(songs=12), seed=11)
