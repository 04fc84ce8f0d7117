"""End-to-end orchestration: corpus in, trained model and artifacts out.

Every stage's randomness derives from one seed, so a full run is
bit-reproducible file by file.
"""

from __future__ import annotations

import hashlib
import logging
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import chordvec, textrep
from .corpus.model import Corpus, SplitAssignment, split_corpus
from .dsp.mfcc import MfccConfig
from .errors import DataError
from .fusion.classifier import (
    THRESHOLD, FusionClassifier, TrainConfig, TrainResult, predict, train,
)
from .fusion.features import FeatureDataset, FeatureExtractor
from .fusion.metrics import Metrics, Prediction, evaluate, metrics_to_tsv, \
    predictions_to_tsv
from .hgat.graph import top_chords
from .hgat.model import PretrainConfig, pretrain_next_line
from .hgat.params import GatDims, GatParams, save_params

log = logging.getLogger(__name__)

SPLIT_RATIOS = (0.8, 0.1, 0.1)


def derive_seed(seed: int, tag: str) -> int:
    digest = hashlib.blake2s(f"{seed}:{tag}".encode()).digest()
    return int.from_bytes(digest[:4], "little")


@dataclass(frozen=True)
class PipelineConfig:
    seed: int = 0
    ratios: tuple[float, float, float] = SPLIT_RATIOS
    mfcc: MfccConfig = MfccConfig()
    d_hidden: int = 128
    heads: int = 4
    d_ffn: int = 512
    d_edge: int = 16
    skipgram_epochs: int = 5
    pretrain_epochs: int = 3
    pretrain_lr: float = 1e-3
    train: TrainConfig = TrainConfig()
    jobs: int = 1


@dataclass
class Artifacts:
    split: SplitAssignment
    word_vocab: textrep.WordVocab
    word_table: textrep.WordEmbeddingTable
    chord_table: chordvec.ChordEmbeddingTable
    chord_nodes: tuple[str, ...]
    gat_params: GatParams
    dataset: FeatureDataset
    result: TrainResult
    predictions: list[Prediction]
    test_metrics: Metrics

    @property
    def classifier(self) -> FusionClassifier:
        return self.result.classifier

    def prediction_map(self) -> dict[tuple[str, int], float]:
        return {(p.song_id, p.line_index): p.probability for p in self.predictions}


def prepare_tables(corpus: Corpus, cfg: PipelineConfig,
                   word_table: Optional[textrep.WordEmbeddingTable] = None):
    """Vocabulary, word vectors, and trained chord embeddings for a corpus."""
    word_vocab, _ = textrep.build_vocab(corpus)
    if word_table is None:
        word_table = textrep.random_word_table(
            word_vocab.words, seed=derive_seed(cfg.seed, "wordvec")
        )
    sequences = [
        list(song.line_chords(i))
        for song in corpus.songs
        for i in range(len(song.lines))
        if song.line_chords(i)
    ]
    if sequences:
        chord_vocab = chordvec.build_chord_vocab(sequences)
        chord_table = chordvec.train_skipgram(
            sequences, chord_vocab,
            chordvec.SkipGramConfig(
                epochs=cfg.skipgram_epochs,
                seed=derive_seed(cfg.seed, "skipgram"),
            ),
        )
    else:
        log.warning("corpus has no chords; chord features will be zero")
        chord_vocab = chordvec.ChordVocab(ids={chordvec.UNK: 0})
        chord_table = chordvec.ChordEmbeddingTable(
            vocab=chord_vocab,
            input_vectors=np.zeros((1, chordvec.EMBED_DIM)),
        )
    return word_vocab, word_table, chord_table


def pretrain_gat(corpus: Corpus, cfg: PipelineConfig, encoder, word_vocab,
                 word_table, chord_table, chord_nodes,
                 song_ids: Optional[list[str]] = None) -> GatParams:
    """Initialize and pre-train graph attention on next-line prediction."""
    dims = GatDims(
        d_sent=encoder.dim, d_word=word_table.dim, d_chord=chord_table.dim,
        d_hidden=cfg.d_hidden, heads=cfg.heads, d_ffn=cfg.d_ffn,
        d_edge=cfg.d_edge,
    )
    params = GatParams.init(dims, derive_seed(cfg.seed, "gat-init"))
    extractor = FeatureExtractor(
        word_vocab, word_table, chord_table, chord_nodes, encoder, params,
        mfcc_config=cfg.mfcc,
    )
    wanted = set(song_ids) if song_ids is not None else None
    graphs = [
        extractor.song_graph(song) for song in corpus.songs
        if wanted is None or song.id in wanted
    ]
    params, losses = pretrain_next_line(
        graphs, params,
        PretrainConfig(epochs=cfg.pretrain_epochs, lr=cfg.pretrain_lr,
                       seed=derive_seed(cfg.seed, "pretrain")),
    )
    log.info("pre-training losses per epoch: %s",
             " ".join(f"{x:.4f}" for x in losses))
    return params


def run_training(corpus: Corpus, cfg: PipelineConfig,
                 encoder=None,
                 word_table: Optional[textrep.WordEmbeddingTable] = None,
                 gat_params: Optional[GatParams] = None,
                 chord_table: Optional[chordvec.ChordEmbeddingTable] = None,
                 modalities=None) -> Artifacts:
    """The full supervised pipeline on a labeled corpus."""
    split = split_corpus(corpus, cfg.ratios, derive_seed(cfg.seed, "split"))
    train_ids = sorted(s.id for s in split.songs_in(corpus, "train"))
    val_ids = sorted(s.id for s in split.songs_in(corpus, "validation"))
    test_ids = sorted(s.id for s in split.songs_in(corpus, "test"))

    word_vocab, word_table, prepared_chords = prepare_tables(
        corpus, cfg, word_table)
    if chord_table is None:
        chord_table = prepared_chords
    if encoder is None:
        encoder = textrep.MeanWordEncoder(word_table)
    chord_nodes = top_chords(corpus)

    if gat_params is None:
        gat_params = pretrain_gat(
            corpus, cfg, encoder, word_vocab, word_table, chord_table,
            chord_nodes, song_ids=train_ids,
        )
        if not cfg.train.finetune_gat:
            gat_params.freeze()

    extractor = FeatureExtractor(
        word_vocab, word_table, chord_table, chord_nodes, encoder, gat_params,
        mfcc_config=cfg.mfcc,
    )
    dataset = extractor.extract(corpus, jobs=cfg.jobs)

    result = train(dataset, train_ids, val_ids, cfg.train,
                   gat_params=gat_params, chord_table=chord_table,
                   modalities=modalities)

    proba = predict(dataset, result.classifier,
                    gat_params=result.gat_params,
                    chord_matrix=result.chord_matrix)
    predictions = [
        Prediction(song_id=sid, line_index=idx, probability=float(p),
                   label=bool(p >= THRESHOLD))
        for (sid, idx), p in zip(dataset.keys, proba)
    ]

    test_rows = dataset.rows_for(test_ids)
    test_metrics = evaluate(
        proba[test_rows] >= THRESHOLD, dataset.y[test_rows] > 0.5
    )
    return Artifacts(
        split=split, word_vocab=word_vocab, word_table=word_table,
        chord_table=chord_table, chord_nodes=chord_nodes,
        gat_params=gat_params, dataset=dataset, result=result,
        predictions=predictions, test_metrics=test_metrics,
    )


_CLS_MAGIC = b"CLS1"
_BLOCK_ORDER = ("lyrics", "mfcc", "chords")


def save_classifier(path, clf: FusionClassifier) -> None:
    mask = np.array([[1.0 if b in clf.block_names else 0.0
                      for b in _BLOCK_ORDER]])
    arrays = {
        "weights": clf.weights[None, :],
        "bias": np.array([[clf.bias]]),
        "mean": clf.mean[None, :],
        "scale": clf.scale[None, :],
        "cols": clf.cols[None, :].astype(np.float64),
        "block_mask": mask,
    }
    with open(path, "wb") as fh:
        fh.write(_CLS_MAGIC)
        fh.write(struct.pack("<I", len(arrays)))
        for name in sorted(arrays):
            arr = np.atleast_2d(arrays[name])
            raw = name.encode()
            fh.write(struct.pack("<H", len(raw)))
            fh.write(raw)
            fh.write(struct.pack("<II", arr.shape[0], arr.shape[1]))
            fh.write(arr.astype("<f8").tobytes(order="C"))


def load_classifier(path) -> FusionClassifier:
    with open(path, "rb") as fh:
        if fh.read(4) != _CLS_MAGIC:
            raise DataError(f"{path}: not a {_CLS_MAGIC.decode()} model file")
        (count,) = struct.unpack("<I", fh.read(4))
        arrays = {}
        for _ in range(count):
            (name_len,) = struct.unpack("<H", fh.read(2))
            name = fh.read(name_len).decode()
            rows, cols = struct.unpack("<II", fh.read(8))
            data = np.frombuffer(fh.read(rows * cols * 8), dtype="<f8")
            arrays[name] = data.reshape(rows, cols)
    names = tuple(
        b for b, flag in zip(_BLOCK_ORDER, arrays["block_mask"][0]) if flag > 0
    )
    return FusionClassifier(
        weights=arrays["weights"][0].copy(),
        bias=float(arrays["bias"][0, 0]),
        mean=arrays["mean"][0].copy(),
        scale=arrays["scale"][0].copy(),
        cols=arrays["cols"][0].astype(np.int64),
        block_names=names,
    )


def save_artifacts(out_dir, artifacts: Artifacts) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    chordvec.save_table(out / "chord_embeddings.txt", artifacts.chord_table)
    textrep.save_word_table(out / "word_vectors.txt", artifacts.word_table)
    save_params(out / "gat_params.bin", artifacts.gat_params)
    save_classifier(out / "classifier.bin", artifacts.classifier)
    (out / "predictions.tsv").write_text(
        predictions_to_tsv(artifacts.predictions), encoding="utf-8")
    (out / "metrics.tsv").write_text(
        metrics_to_tsv(artifacts.test_metrics), encoding="utf-8")
    grid_rows = [
        f"{lr:.9g}\t{ep}\t{f1:.6f}" for lr, ep, f1 in artifacts.result.grid_history
    ]
    chosen = (f"# chosen\t{artifacts.result.grid_lr:.9g}"
              f"\t{artifacts.result.grid_epochs}\n")
    (out / "grid.tsv").write_text(
        "\n".join(grid_rows) + "\n" + chosen, encoding="utf-8")
    split_rows = sorted(artifacts.split.by_song.items())
    (out / "split.tsv").write_text(
        "\n".join(f"{sid}\t{part}" for sid, part in split_rows) + "\n",
        encoding="utf-8")
