"""Sidecar TSV annotations: chorus labels and per-line chord sequences."""

from __future__ import annotations

from dataclasses import replace

from ..errors import RowError
from .model import Corpus


def _parse_rows(tsv_text: str, n_fields: int):
    for row_no, raw in enumerate(tsv_text.splitlines(), start=1):
        if not raw.strip():
            continue
        fields = raw.rstrip("\r").split("\t")
        if len(fields) != n_fields:
            raise RowError(row_no, f"expected {n_fields} fields, got {len(fields)}")
        yield row_no, fields


def _locate(corpus: Corpus, row_no: int, song_id: str, index_str: str) -> tuple[int, int]:
    by_id = {s.id: i for i, s in enumerate(corpus.songs)}
    if song_id not in by_id:
        raise RowError(row_no, f"unknown song id {song_id!r}")
    try:
        idx = int(index_str)
    except ValueError:
        raise RowError(row_no, f"bad line index {index_str!r}") from None
    song = corpus.songs[by_id[song_id]]
    if not 0 <= idx < len(song.lines):
        raise RowError(
            row_no, f"line index {idx} out of range for song {song_id!r} "
            f"({len(song.lines)} lines)"
        )
    return by_id[song_id], idx


def load_labels(tsv_text: str, corpus: Corpus) -> Corpus:
    """Attach boolean chorus labels from ``song_id<TAB>line_index<TAB>{0|1}`` rows.

    Lines not referenced stay unlabeled; bad rows raise RowError naming the row.
    """
    labels: dict[tuple[int, int], bool] = {}
    for row_no, (song_id, index_str, value) in _parse_rows(tsv_text, 3):
        si, li = _locate(corpus, row_no, song_id, index_str)
        if value not in ("0", "1"):
            raise RowError(row_no, f"label must be 0 or 1, got {value!r}")
        labels[(si, li)] = value == "1"
    if not labels:
        return corpus

    songs = list(corpus.songs)
    touched = {si for si, _ in labels}
    for si in touched:
        song = songs[si]
        lines = tuple(
            replace(ln, label=labels.get((si, ln.index), ln.label))
            for ln in song.lines
        )
        songs[si] = replace(song, lines=lines)
    return corpus.with_songs(tuple(songs))


def load_chords(tsv_text: str, corpus: Corpus) -> Corpus:
    """Attach chord sequences from ``song_id<TAB>line_index<TAB>chord chord ...`` rows.

    Songs with any chord row get a full per-line chord track; unreferenced
    lines hold empty sequences.
    """
    chords: dict[tuple[int, int], tuple[str, ...]] = {}
    for row_no, (song_id, index_str, symbols) in _parse_rows(tsv_text, 3):
        si, li = _locate(corpus, row_no, song_id, index_str)
        chords[(si, li)] = tuple(symbols.split())
    if not chords:
        return corpus

    songs = list(corpus.songs)
    touched = {si for si, _ in chords}
    for si in touched:
        song = songs[si]
        track = tuple(
            chords.get((si, i), song.line_chords(i)) for i in range(len(song.lines))
        )
        songs[si] = replace(song, chords=track)
    return corpus.with_songs(tuple(songs))


def labels_to_tsv(corpus: Corpus) -> str:
    rows = []
    for song in corpus.songs:
        for ln in song.lines:
            if ln.label is not None:
                rows.append(f"{song.id}\t{ln.index}\t{1 if ln.label else 0}")
    return "\n".join(rows) + ("\n" if rows else "")


def chords_to_tsv(corpus: Corpus) -> str:
    rows = []
    for song in corpus.songs:
        if song.chords is None:
            continue
        for i, seq in enumerate(song.chords):
            if seq:
                rows.append(f"{song.id}\t{i}\t{' '.join(seq)}")
    return "\n".join(rows) + ("\n" if rows else "")
