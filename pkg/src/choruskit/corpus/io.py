"""On-disk corpus layout.

    <dir>/lyrics/<song_id>.lrc
    <dir>/labels.tsv        (optional)
    <dir>/chords.tsv        (optional)
    <dir>/audio/<song_id>.wav   (optional)

Audio is loaded lazily: songs carry the WAV path until a waveform is needed.
"""

from __future__ import annotations

import os
from pathlib import Path

from ..errors import DataError
from ..dsp.waveform import Waveform, load_wav, save_wav
from .annotations import chords_to_tsv, labels_to_tsv, load_chords, load_labels
from .lrc import parse_lrc, serialize_lrc
from .model import Corpus, Song


def save_corpus_dir(corpus: Corpus, out_dir) -> None:
    out = Path(out_dir)
    (out / "lyrics").mkdir(parents=True, exist_ok=True)
    for song in corpus.songs:
        (out / "lyrics" / f"{song.id}.lrc").write_text(
            serialize_lrc(list(song.lines)), encoding="utf-8"
        )
    labels = labels_to_tsv(corpus)
    if labels:
        (out / "labels.tsv").write_text(labels, encoding="utf-8")
    chords = chords_to_tsv(corpus)
    if chords:
        (out / "chords.tsv").write_text(chords, encoding="utf-8")
    wavs = [s for s in corpus.songs if isinstance(s.audio, Waveform)]
    if wavs:
        (out / "audio").mkdir(exist_ok=True)
        for song in wavs:
            save_wav(out / "audio" / f"{song.id}.wav", song.audio)


def load_corpus_dir(data_dir) -> Corpus:
    root = Path(data_dir)
    lyrics_dir = root / "lyrics"
    if not lyrics_dir.is_dir():
        raise DataError(f"no lyrics/ directory under {root}")
    songs = []
    for path in sorted(lyrics_dir.glob("*.lrc")):
        lines = parse_lrc(path.read_text(encoding="utf-8"))
        song_id = path.stem
        wav = root / "audio" / f"{song_id}.wav"
        songs.append(Song(
            id=song_id,
            lines=tuple(lines),
            audio=str(wav) if wav.exists() else None,
        ))
    if not songs:
        raise DataError(f"no .lrc files under {lyrics_dir}")
    corpus = Corpus(songs=tuple(songs))
    labels = root / "labels.tsv"
    if labels.exists():
        corpus = load_labels(labels.read_text(encoding="utf-8"), corpus)
    chords = root / "chords.tsv"
    if chords.exists():
        corpus = load_chords(chords.read_text(encoding="utf-8"), corpus)
    return corpus


def song_waveform(song: Song) -> Waveform:
    """Resolve a song's audio reference to an in-memory waveform."""
    if isinstance(song.audio, Waveform):
        return song.audio
    if isinstance(song.audio, (str, os.PathLike)):
        return load_wav(song.audio)
    raise DataError(f"song {song.id} has no audio")
