import pytest

from choruskit.cli import load_config, main
from choruskit.errors import DataError


@pytest.fixture(scope="module")
def data_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("cli") / "data"
    code = main(["corpus", "synth", "--songs", "12", "--seed", "4",
                 "--out", str(out)])
    assert code == 0
    return out


@pytest.fixture(scope="module")
def model_dir(data_dir, tmp_path_factory):
    out = tmp_path_factory.mktemp("cli") / "model"
    code = main(["--seed", "4", "mmcr", "train", "--data", str(data_dir),
                 "--out", str(out), "--no-grid"])
    assert code == 0
    return out


def test_synth_layout(data_dir):
    assert (data_dir / "lyrics").is_dir()
    assert (data_dir / "labels.tsv").exists()
    assert (data_dir / "chords.tsv").exists()
    assert len(list((data_dir / "audio").glob("*.wav"))) == 12


def test_corpus_stats(data_dir, capsys):
    assert main(["corpus", "stats", "--data", str(data_dir)]) == 0
    out = capsys.readouterr().out
    assert "songs\t12" in out
    assert "lines\t192" in out


def test_unknown_flag_usage_error(capsys):
    assert main(["corpus", "stats", "--nonsense"]) == 1


def test_missing_data_is_data_error(tmp_path):
    assert main(["corpus", "stats", "--data", str(tmp_path / "nope")]) == 2


def test_mmcr_train_writes_artifacts(model_dir, capsys):
    for name in ("classifier.bin", "gat_params.bin", "chord_embeddings.txt",
                 "predictions.tsv", "metrics.tsv", "grid.tsv", "split.tsv"):
        assert (model_dir / name).exists(), name


def test_mmcr_eval_roundtrip(data_dir, model_dir, capsys):
    code = main(["mmcr", "eval",
                 "--predictions", str(model_dir / "predictions.tsv"),
                 "--labels", str(data_dir / "labels.tsv")])
    assert code == 0
    assert "mmcr" in capsys.readouterr().out


def test_mmcr_eval_mismatch_exits_2(data_dir, model_dir, tmp_path, capsys):
    truncated = "\n".join(
        (model_dir / "predictions.tsv").read_text().splitlines()[:5]
    ) + "\n"
    bad = tmp_path / "short.tsv"
    bad.write_text(truncated)
    code = main(["mmcr", "eval", "--predictions", str(bad),
                 "--labels", str(data_dir / "labels.tsv")])
    assert code == 2


def test_features_mfcc(data_dir, tmp_path, capsys):
    out = tmp_path / "mfcc"
    assert main(["features", "mfcc", "--data", str(data_dir),
                 "--out", str(out)]) == 0
    files = list(out.glob("*.mfcc"))
    assert len(files) == 192
    assert files[0].read_bytes().startswith(b"MFCC1 ")


def test_chordvec_train(data_dir, tmp_path):
    out = tmp_path / "chords.txt"
    assert main(["chordvec", "train", "--data", str(data_dir),
                 "--out", str(out)]) == 0
    header = out.read_text().splitlines()[0].split()
    assert header[1] == "64"


def test_hgat_pretrain(data_dir, tmp_path):
    out = tmp_path / "gat.bin"
    assert main(["--seed", "4", "hgat", "pretrain", "--data", str(data_dir),
                 "--out", str(out), "--epochs", "1"]) == 0
    assert out.read_bytes()[:5] == b"HGAT1"


def test_baselines_eval(data_dir, capsys):
    assert main(["--seed", "4", "baselines", "eval",
                 "--data", str(data_dir)]) == 0
    out = capsys.readouterr().out
    assert "textrank" in out and "pacsum" in out and "ext" in out


@pytest.fixture(scope="module")
def index_file(data_dir, model_dir, tmp_path_factory):
    out = tmp_path_factory.mktemp("search") / "index.ngx"
    code = main(["search", "build", "--data", str(data_dir),
                 "--predictions", str(model_dir / "predictions.tsv"),
                 "--out", str(out)])
    assert code == 0
    return out


class TestSearchCli:
    def test_query(self, index_file, data_dir, capsys):
        lrc = sorted((data_dir / "lyrics").glob("*.lrc"))[0]
        chorus_line = [
            ln for ln in lrc.read_text().splitlines() if ln
        ][2].split("]", 1)[1]
        keyword = " ".join(chorus_line.split()[:3])
        code = main(["search", "query", "--index", str(index_file),
                     "--keyword", keyword, "--k", "3"])
        assert code == 0
        rows = capsys.readouterr().out.strip().splitlines()
        assert rows and rows[0].split("\t")[0] == "1"

    def test_query_no_match_empty_exit_zero(self, index_file, capsys):
        code = main(["search", "query", "--index", str(index_file),
                     "--keyword", "zz qq pp"])
        assert code == 0
        assert capsys.readouterr().out.strip() == ""

    def test_eval(self, index_file, data_dir, model_dir, tmp_path, capsys):
        from choruskit.corpus.io import load_corpus_dir
        from choruskit.fusion.metrics import parse_predictions_tsv
        from choruskit.songsearch import generate_queries
        corpus = load_corpus_dir(data_dir)
        preds = parse_predictions_tsv(
            (model_dir / "predictions.tsv").read_text())
        pred_map = {(p.song_id, p.line_index): p.probability for p in preds}
        queries = generate_queries(corpus, pred_map)
        assert queries
        qfile = tmp_path / "queries.tsv"
        qfile.write_text(
            "\n".join(f"{kw}\t{target}" for kw, target in queries) + "\n")
        code = main(["search", "eval", "--index", str(index_file),
                     "--queries", str(qfile), "--method", "both"])
        assert code == 0
        out = capsys.readouterr().out
        assert "chorus:" in out and "tfidf:" in out


def test_config_file_defaults(data_dir, tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(f"data = {data_dir}\n# comment\nseed = 4\n")
    assert main(["--config", str(cfg), "corpus", "stats"]) == 0
    assert "songs\t12" in capsys.readouterr().out


def test_config_parser(tmp_path):
    cfg = tmp_path / "x.cfg"
    cfg.write_text("a = 1\n\n# note\nb-c = two words\n")
    assert load_config(cfg) == {"a": "1", "b_c": "two words"}
    bad = tmp_path / "bad.cfg"
    bad.write_text("no equals sign\n")
    with pytest.raises(DataError):
        load_config(bad)
