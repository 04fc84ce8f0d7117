"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 data error. All randomness flows
from --seed; a config file supplies defaults for value flags and explicit
flags win.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import chordvec, songsearch, textrep
from .corpus.io import load_corpus_dir, save_corpus_dir, song_waveform
from .corpus.model import corpus_stats, split_corpus
from .corpus.synth import SynthConfig, synth_corpus
from .dsp.mfcc import MfccConfig, compute_mfcc, save_matrix
from .dsp.waveform import resample, slice_line_audio
from .errors import DataError
from .fusion.baselines import baseline_ext, baseline_pacsum, baseline_textrank
from .fusion.classifier import THRESHOLD, TrainConfig
from .fusion.metrics import (
    evaluate, format_metrics_table, metrics_to_tsv, parse_predictions_tsv,
    select_top_k,
)
from .hgat.params import load_params, save_params
from .pipeline import (
    SPLIT_RATIOS, PipelineConfig, derive_seed, pretrain_gat, prepare_tables,
    run_training, save_artifacts,
)

log = logging.getLogger("choruskit")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(1)


def load_config(path) -> dict[str, str]:
    """``key = value`` lines; blank lines and # comments ignored."""
    out = {}
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise DataError(f"config line without '=': {line!r}")
        key, value = line.split("=", 1)
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def _build_parser(defaults: dict | None = None) -> _Parser:
    # --seed/--jobs/--config are accepted both before and after the
    # subcommand; SUPPRESS keeps a leaf default from stomping a value
    # parsed at the top level
    common = _Parser(add_help=False)
    for flag, kw in (("--config", {}), ("--seed", {}), ("--jobs", {})):
        common.add_argument(flag, default=argparse.SUPPRESS, **kw)

    parser = _Parser(prog="choruskit", parents=[common])
    if defaults:
        parser.set_defaults(**defaults)
    sub = parser.add_subparsers(dest="command", required=True)

    def leaf(group, name):
        # config defaults go on every leaf: subparsers parse into a fresh
        # namespace that overwrites the parent's values
        p = group.add_parser(name, parents=[common])
        if defaults:
            p.set_defaults(**defaults)
        return p

    corpus = sub.add_parser("corpus").add_subparsers(dest="action", required=True)
    p = leaf(corpus, "stats")
    p.add_argument("--data")
    p = leaf(corpus, "synth")
    p.add_argument("--out")
    p.add_argument("--songs", type=int, default=20)
    p.add_argument("--lines", type=int, default=16)
    p.add_argument("--block", type=int, default=4)
    p.add_argument("--repeats", type=int, default=2)
    p.add_argument("--verse-vocab", type=int, default=12)
    p.add_argument("--chorus-vocab", type=int, default=40)
    p.add_argument("--chord-styles", type=int, default=4)

    feats = sub.add_parser("features").add_subparsers(dest="action", required=True)
    p = leaf(feats, "mfcc")
    p.add_argument("--data")
    p.add_argument("--out")

    cv = sub.add_parser("chordvec").add_subparsers(dest="action", required=True)
    p = leaf(cv, "train")
    p.add_argument("--data", help="corpus directory with chords.tsv")
    p.add_argument("--chords", help="standalone chord TSV for pre-training")
    p.add_argument("--out")
    p.add_argument("--epochs", type=int, default=5)

    hg = sub.add_parser("hgat").add_subparsers(dest="action", required=True)
    p = leaf(hg, "pretrain")
    p.add_argument("--data")
    p.add_argument("--out")
    p.add_argument("--embeddings", help="precomputed sentence vectors")
    p.add_argument("--word-vectors")
    p.add_argument("--epochs", type=int, default=3)
    p.add_argument("--lr", type=float, default=1e-3)

    mm = sub.add_parser("mmcr").add_subparsers(dest="action", required=True)
    p = leaf(mm, "train")
    p.add_argument("--data")
    p.add_argument("--out")
    p.add_argument("--embeddings")
    p.add_argument("--word-vectors")
    p.add_argument("--gat", help="pre-trained graph attention parameters")
    p.add_argument("--no-grid", action="store_true",
                   help="train only the default lr/epoch point")
    p.add_argument("--no-standardize", action="store_true")
    p.add_argument("--finetune-gat", action="store_true")
    p.add_argument("--finetune-chords", action="store_true")
    p = leaf(mm, "eval")
    p.add_argument("--predictions")
    p.add_argument("--labels")
    p.add_argument("--out")

    bl = sub.add_parser("baselines").add_subparsers(dest="action", required=True)
    p = leaf(bl, "eval")
    p.add_argument("--data")
    p.add_argument("--embeddings")
    p.add_argument("--word-vectors")
    p.add_argument("--out")

    se = sub.add_parser("search").add_subparsers(dest="action", required=True)
    p = leaf(se, "build")
    p.add_argument("--data")
    p.add_argument("--predictions")
    p.add_argument("--out")
    p = leaf(se, "query")
    p.add_argument("--index")
    p.add_argument("--keyword")
    p.add_argument("--k", type=int, default=10)
    p = leaf(se, "eval")
    p.add_argument("--index")
    p.add_argument("--queries")
    p.add_argument("--method", choices=("chorus", "tfidf", "both"),
                   default="both")
    p.add_argument("--out")
    return parser


def _encoder_for(args, corpus, cfg):
    word_table = None
    if getattr(args, "word_vectors", None):
        word_table = textrep.load_word_table(args.word_vectors)
    word_vocab, word_table, chord_table = prepare_tables(corpus, cfg, word_table)
    if getattr(args, "embeddings", None):
        store = textrep.load_embedding_store(args.embeddings)
        encoder = textrep.PrecomputedEncoder(store)
    else:
        encoder = textrep.MeanWordEncoder(word_table)
    return word_vocab, word_table, chord_table, encoder


def _cmd_corpus(args) -> int:
    if args.action == "stats":
        stats = corpus_stats(load_corpus_dir(args.data))
        print(f"songs\t{stats.songs}")
        print(f"lines\t{stats.lines}")
        print(f"mean_lines_per_song\t{stats.mean_lines_per_song:.2f}")
        print(f"chorus_fraction\t{stats.chorus_fraction:.4f}")
        return 0
    cfg = SynthConfig(songs=args.songs, lines_per_song=args.lines,
                      chorus_block=args.block, chorus_repeats=args.repeats,
                      verse_vocab=int(args.verse_vocab),
                      chorus_vocab=int(args.chorus_vocab),
                      chord_styles=int(args.chord_styles))
    corpus = synth_corpus(cfg, seed=args.seed)
    save_corpus_dir(corpus, args.out)
    print(f"wrote {len(corpus.songs)} songs to {args.out}")
    return 0


def _cmd_features(args) -> int:
    corpus = load_corpus_dir(args.data)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    config = MfccConfig()
    n = 0
    for song in corpus.songs:
        wave = song_waveform(song)
        for ln in song.lines:
            clip = resample(slice_line_audio(wave, ln), 16_000)
            save_matrix(out / f"{song.id}.L{ln.index}.mfcc",
                        compute_mfcc(clip, config))
            n += 1
    print(f"wrote {n} MFCC matrices to {out}")
    return 0


def _cmd_chordvec(args) -> int:
    sequences = []
    if args.data:
        corpus = load_corpus_dir(args.data)
        sequences = [
            list(song.line_chords(i))
            for song in corpus.songs for i in range(len(song.lines))
            if song.line_chords(i)
        ]
    elif args.chords:
        text = Path(args.chords).read_text(encoding="utf-8")
        for raw in text.splitlines():
            if raw.strip():
                sequences.append(raw.rstrip("\r").split("\t")[-1].split())
    else:
        raise DataError("chordvec train needs --data or --chords")
    vocab = chordvec.build_chord_vocab(sequences)
    table = chordvec.train_skipgram(
        sequences, vocab,
        chordvec.SkipGramConfig(epochs=args.epochs,
                                seed=derive_seed(args.seed, "skipgram")),
    )
    chordvec.save_table(args.out, table)
    print(f"trained {vocab.size} chord embeddings -> {args.out}")
    return 0


def _cmd_hgat(args) -> int:
    corpus = load_corpus_dir(args.data)
    cfg = PipelineConfig(seed=args.seed, pretrain_epochs=args.epochs,
                         pretrain_lr=args.lr)
    word_vocab, word_table, chord_table, encoder = _encoder_for(args, corpus, cfg)
    from .hgat.graph import top_chords
    params = pretrain_gat(corpus, cfg, encoder, word_vocab, word_table,
                          chord_table, top_chords(corpus))
    save_params(args.out, params)
    print(f"wrote pre-trained graph attention parameters -> {args.out}")
    return 0


def _cmd_mmcr(args) -> int:
    if args.action == "eval":
        preds = parse_predictions_tsv(
            Path(args.predictions).read_text(encoding="utf-8"))
        labels = {}
        for row_no, raw in enumerate(
                Path(args.labels).read_text(encoding="utf-8").splitlines(), 1):
            if not raw.strip():
                continue
            fields = raw.rstrip("\r").split("\t")
            if len(fields) != 3 or fields[2] not in ("0", "1"):
                raise DataError(f"labels row {row_no}: malformed")
            labels[(fields[0], int(fields[1]))] = fields[2] == "1"
        pred_keys = {(p.song_id, p.line_index) for p in preds}
        if pred_keys != set(labels):
            raise DataError(
                f"prediction/label key sets differ "
                f"({len(pred_keys)} vs {len(labels)} lines)"
            )
        ordered = sorted(preds, key=lambda p: (p.song_id, p.line_index))
        metrics = evaluate(
            [p.label for p in ordered],
            [labels[(p.song_id, p.line_index)] for p in ordered],
        )
        print(format_metrics_table({"mmcr": metrics}))
        if args.out:
            Path(args.out).write_text(metrics_to_tsv(metrics), encoding="utf-8")
        return 0

    corpus = load_corpus_dir(args.data)
    train_cfg_kw = dict(
        seed=derive_seed(args.seed, "train"),
        standardize=not args.no_standardize,
        finetune_gat=args.finetune_gat,
        finetune_chords=args.finetune_chords,
    )
    train_cfg = (TrainConfig.default_point(**train_cfg_kw) if args.no_grid
                 else TrainConfig(**train_cfg_kw))
    cfg = PipelineConfig(seed=args.seed, train=train_cfg, jobs=args.jobs)

    word_table = (textrep.load_word_table(args.word_vectors)
                  if args.word_vectors else None)
    encoder = None
    if args.embeddings:
        encoder = textrep.PrecomputedEncoder(
            textrep.load_embedding_store(args.embeddings))
    gat_params = load_params(args.gat) if args.gat else None
    if gat_params is not None and not train_cfg.finetune_gat:
        gat_params.freeze()

    artifacts = run_training(corpus, cfg, encoder=encoder,
                             word_table=word_table, gat_params=gat_params)
    save_artifacts(args.out, artifacts)
    print(format_metrics_table({"mmcr(test)": artifacts.test_metrics}))
    print(f"grid choice: lr={artifacts.result.grid_lr:g} "
          f"epochs={artifacts.result.grid_epochs} "
          f"(val F1 {artifacts.result.val_f1:.4f})")
    print(f"artifacts -> {args.out}")
    return 0


def _cmd_baselines(args) -> int:
    corpus = load_corpus_dir(args.data)
    cfg = PipelineConfig(seed=args.seed)
    _, _, _, encoder = _encoder_for(args, corpus, cfg)
    split = split_corpus(corpus, SPLIT_RATIOS, derive_seed(args.seed, "split"))
    train_ids = sorted(s.id for s in split.songs_in(corpus, "train"))
    val_ids = sorted(s.id for s in split.songs_in(corpus, "validation"))
    test_songs = split.songs_in(corpus, "test")
    if any(not s.is_labeled for s in test_songs):
        raise DataError("baselines eval needs labeled test songs")

    named = {}
    for name, scorer in (("textrank", baseline_textrank),
                         ("pacsum", baseline_pacsum)):
        pred, true = [], []
        for song in test_songs:
            labels = [bool(ln.label) for ln in song.lines]
            k = sum(labels)
            scores = scorer(song, encoder)
            pred.extend(select_top_k(scores, k).tolist())
            true.extend(labels)
        named[name] = evaluate(pred, true)

    result, dataset = baseline_ext(
        corpus, encoder, train_ids, val_ids,
        TrainConfig.default_point(seed=derive_seed(args.seed, "ext")),
    )
    test_rows = dataset.rows_for(sorted(s.id for s in test_songs))
    from .fusion.classifier import predict as clf_predict
    proba = clf_predict(dataset, result.classifier, test_rows)
    named["ext"] = evaluate(proba >= THRESHOLD, dataset.y[test_rows] > 0.5)

    table = format_metrics_table(named)
    print(table)
    if args.out:
        rows = [
            f"{name}\t{metrics_to_tsv(m).strip()}" for name, m in named.items()
        ]
        Path(args.out).write_text("\n".join(rows) + "\n", encoding="utf-8")
    return 0


def _cmd_search(args) -> int:
    if args.action == "build":
        corpus = load_corpus_dir(args.data)
        preds = parse_predictions_tsv(
            Path(args.predictions).read_text(encoding="utf-8"))
        prediction_map = {
            (p.song_id, p.line_index): p.probability for p in preds
        }
        index = songsearch.build_index(corpus, prediction_map)
        songsearch.save_index(args.out, index)
        print(f"indexed {index.posting_count} postings over "
              f"{len(index.grams)} n-grams -> {args.out}")
        return 0
    index = songsearch.load_index(args.index)
    if args.action == "query":
        result = songsearch.query_chorus(index, args.keyword, k=args.k)
        for e in result.entries:
            print(f"{e.rank}\t{e.song_id}\t{e.score:.9g}\t{e.line_index}")
        return 0
    queries = []
    for row_no, raw in enumerate(
            Path(args.queries).read_text(encoding="utf-8").splitlines(), 1):
        if not raw.strip():
            continue
        fields = raw.rstrip("\r").split("\t")
        if len(fields) != 2:
            raise DataError(f"queries row {row_no}: expected 2 fields")
        queries.append((fields[0], fields[1]))
    methods = ("chorus", "tfidf") if args.method == "both" else (args.method,)
    lines = []
    for method in methods:
        report = songsearch.eval_hits(index, queries, method)
        hits = "\t".join(f"{report.hits[k]:.4f}" for k in sorted(report.hits))
        lines.append(f"{method}\t{hits}")
        ks = "\t".join(f"hits@{k}" for k in sorted(report.hits))
        print(f"{method}: {ks} = {hits} over {report.n_queries} queries")
    if args.out:
        Path(args.out).write_text("\n".join(lines) + "\n", encoding="utf-8")
    return 0


_COMMANDS = {
    "corpus": _cmd_corpus,
    "features": _cmd_features,
    "chordvec": _cmd_chordvec,
    "hgat": _cmd_hgat,
    "mmcr": _cmd_mmcr,
    "baselines": _cmd_baselines,
    "search": _cmd_search,
}

# flags that must arrive via command line or config file
_REQUIRED = {
    ("corpus", "stats"): ("data",),
    ("corpus", "synth"): ("out",),
    ("features", "mfcc"): ("data", "out"),
    ("chordvec", "train"): ("out",),
    ("hgat", "pretrain"): ("data", "out"),
    ("mmcr", "train"): ("data", "out"),
    ("mmcr", "eval"): ("predictions", "labels"),
    ("baselines", "eval"): ("data",),
    ("search", "build"): ("data", "predictions", "out"),
    ("search", "query"): ("index", "keyword"),
    ("search", "eval"): ("index", "queries"),
}


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    args_list = list(sys.argv[1:] if argv is None else argv)
    defaults = None
    if "--config" in args_list:
        path = args_list[args_list.index("--config") + 1]
        try:
            defaults = load_config(path)
        except (OSError, DataError) as exc:
            sys.stderr.write(f"choruskit: config error: {exc}\n")
            return 2
    parser = _build_parser(defaults)
    try:
        args = parser.parse_args(args_list)
    except SystemExit as exc:
        return int(exc.code or 0)
    missing = [
        f"--{name.replace('_', '-')}"
        for name in _REQUIRED.get((args.command, getattr(args, "action", "")), ())
        if getattr(args, name, None) is None
    ]
    if missing:
        sys.stderr.write(
            f"choruskit: error: missing required arguments: "
            f"{', '.join(missing)}\n"
        )
        return 1
    args.seed = int(getattr(args, "seed", 0))
    args.jobs = int(getattr(args, "jobs", 1))
    try:
        return _COMMANDS[args.command](args)
    except DataError as exc:
        sys.stderr.write(f"choruskit: error: {exc}\n")
        return 2
    except OSError as exc:
        sys.stderr.write(f"choruskit: error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
