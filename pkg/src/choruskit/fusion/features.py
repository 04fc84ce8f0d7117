"""Per-line fused features: lyric representation, flattened MFCC matrix,
and concatenated chord embeddings.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..chordvec import ChordEmbeddingTable, MAX_LINE_CHORDS, chord_feature
from ..corpus.io import song_waveform
from ..corpus.model import Corpus, Song
from ..dsp.mfcc import MfccConfig, N_COEFF, TARGET_FRAMES, compute_mfcc, fit_frames
from ..dsp.waveform import resample, slice_line_audio
from ..errors import DataError
from ..hgat.graph import HeteroGraph, build_graph
from ..hgat.model import propagate
from ..hgat.params import GatParams
from ..textrep import WordEmbeddingTable, WordVocab

MFCC_BLOCK = TARGET_FRAMES * N_COEFF  # 16640
PROCESS_RATE = 16_000


def fuse(lyric_vec: np.ndarray, mfcc_matrix: np.ndarray,
         chord_vec: np.ndarray) -> np.ndarray:
    """Concatenate [lyrics | row-major MFCC | chords] into one vector."""
    lyric_vec = np.asarray(lyric_vec)
    mfcc_matrix = np.asarray(mfcc_matrix)
    chord_vec = np.asarray(chord_vec)
    if lyric_vec.ndim != 1:
        raise DataError(f"lyric feature must be a vector, got {lyric_vec.shape}")
    if mfcc_matrix.shape != (TARGET_FRAMES, N_COEFF):
        raise DataError(
            f"MFCC block must be {TARGET_FRAMES}x{N_COEFF}, got {mfcc_matrix.shape}"
        )
    if chord_vec.shape != (MAX_LINE_CHORDS * 64,):
        raise DataError(
            f"chord block must be {MAX_LINE_CHORDS * 64}, got {chord_vec.shape}"
        )
    return np.concatenate([lyric_vec, mfcc_matrix.reshape(-1), chord_vec])


@dataclass
class FeatureDataset:
    """Fused line features with enough structure to re-derive the lyric and
    chord blocks when joint training updates their parameters."""

    keys: list[tuple[str, int]]
    X: np.ndarray  # (n, d_f) float32
    y: np.ndarray  # (n,) float, 0/1, nan when unlabeled
    blocks: dict[str, slice]
    song_rows: dict[str, np.ndarray]
    graphs: dict[str, HeteroGraph] = field(default_factory=dict)
    chord_ids: Optional[np.ndarray] = None  # (n, max_chords), -1 padding

    @property
    def dim(self) -> int:
        return self.X.shape[1]

    def rows_for(self, song_ids) -> np.ndarray:
        parts = [self.song_rows[sid] for sid in song_ids if sid in self.song_rows]
        if not parts:
            return np.zeros(0, dtype=np.int64)
        return np.concatenate(parts)


class FeatureExtractor:
    def __init__(
        self,
        word_vocab: WordVocab,
        word_table: WordEmbeddingTable,
        chord_table: ChordEmbeddingTable,
        chord_nodes: tuple[str, ...],
        encoder,
        gat_params: GatParams,
        mfcc_config: MfccConfig = MfccConfig(),
        max_chords: int = MAX_LINE_CHORDS,
    ):
        self.word_vocab = word_vocab
        self.word_table = word_table
        self.chord_table = chord_table
        self.chord_nodes = chord_nodes
        self.encoder = encoder
        self.gat_params = gat_params
        self.mfcc_config = mfcc_config
        self.max_chords = max_chords

    def song_graph(self, song: Song) -> HeteroGraph:
        base = np.stack([
            self.encoder.encode(song.id, ln) for ln in song.lines
        ])
        return build_graph(song, self.word_vocab, self.chord_nodes, base,
                           self.word_table, self.chord_table)

    def line_mfcc(self, waveform, line) -> np.ndarray:
        clip = slice_line_audio(waveform, line)
        clip = resample(clip, PROCESS_RATE)
        frame = int(round(self.mfcc_config.frame_ms * PROCESS_RATE / 1000.0))
        if len(clip.samples) < frame:
            return np.zeros((TARGET_FRAMES, N_COEFF))
        return fit_frames(compute_mfcc(clip, self.mfcc_config))

    def extract(self, corpus: Corpus, jobs: int = 1) -> FeatureDataset:
        d_h = self.gat_params.dims.d_hidden
        chord_dim = self.chord_table.dim
        d_f = d_h + MFCC_BLOCK + self.max_chords * chord_dim
        blocks = {
            "lyrics": slice(0, d_h),
            "mfcc": slice(d_h, d_h + MFCC_BLOCK),
            "chords": slice(d_h + MFCC_BLOCK, d_f),
        }
        n = sum(len(s.lines) for s in corpus.songs)
        X = np.zeros((n, d_f), dtype=np.float32)
        y = np.full(n, np.nan)
        chord_ids = np.full((n, self.max_chords), -1, dtype=np.int64)
        keys: list[tuple[str, int]] = [None] * n  # type: ignore[list-item]
        song_rows = {}
        graphs = {}

        offsets = {}
        pos = 0
        for song in corpus.songs:
            offsets[song.id] = pos
            song_rows[song.id] = np.arange(pos, pos + len(song.lines))
            pos += len(song.lines)

        def fill_song(song: Song):
            base = offsets[song.id]
            graph = self.song_graph(song)
            lines_rep = propagate(graph, self.gat_params).lines
            waveform = song_waveform(song) if song.audio is not None else None
            for i, ln in enumerate(song.lines):
                row = base + i
                keys[row] = (song.id, ln.index)
                if ln.label is not None:
                    y[row] = 1.0 if ln.label else 0.0
                seq = song.line_chords(i)
                for k, sym in enumerate(seq[: self.max_chords]):
                    chord_ids[row, k] = self.chord_table.vocab.id_of(sym)
                mfcc = (self.line_mfcc(waveform, ln) if waveform is not None
                        else np.zeros((TARGET_FRAMES, N_COEFF)))
                X[row] = fuse(
                    lines_rep[i], mfcc,
                    chord_feature(seq, self.chord_table, self.max_chords),
                ).astype(np.float32)
            return graph

        if jobs > 1:
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                for song, graph in zip(corpus.songs,
                                       pool.map(fill_song, corpus.songs)):
                    graphs[song.id] = graph
        else:
            for song in corpus.songs:
                graphs[song.id] = fill_song(song)

        return FeatureDataset(
            keys=keys, X=X, y=y, blocks=blocks, song_rows=song_rows,
            graphs=graphs, chord_ids=chord_ids,
        )
