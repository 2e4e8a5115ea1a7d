import json

import pytest

from famgraph.cli import main
from famgraph.interchange import load_records

LEARN = ["--n-estimators", "10"]


@pytest.fixture(scope="module")
def work(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    assert main(["synth", "--n-benign", "12", "--n-malware", "12", "--seed", "2",
                 "-o", str(d / "corpus.jsonl")]) == 0
    assert main(["features", str(d / "corpus.jsonl"), "-o", str(d / "graph.csv")]) == 0
    assert main(["markov", str(d / "corpus.jsonl"), "-o", str(d / "markov.csv")]) == 0
    return d


def test_synth_writes_labelled_corpus(work):
    recs = load_records(work / "corpus.jsonl")
    assert len(recs) == 24 and {r.label for r in recs} == {"benign", "malware"}


def test_abstract(work):
    assert main(["abstract", str(work / "corpus.jsonl"), "-o", str(work / "fam.jsonl")]) == 0
    assert all(r.graph.n_nodes <= 12 for r in load_records(work / "fam.jsonl"))


def test_ingest_with_reports(work, tmp_path):
    reports = tmp_path / "r.jsonl"
    reports.write_text('{"app_id": "benign-00000", "positives": 9, "total": 60}\n')
    disc = tmp_path / "disc.json"
    assert main(["ingest", str(work / "corpus.jsonl"), "--reports", str(reports),
                 "--discrepancies", str(disc), "-o", str(tmp_path / "out.jsonl")]) == 0
    assert load_records(tmp_path / "out.jsonl")[0].label == "malware"
    assert json.loads(disc.read_text())[0]["existing"] == "benign"


def test_rank(work, tmp_path):
    assert main(["rank", str(work / "graph.csv"), "--plot-data", str(tmp_path / "g.dat"),
                 "-o", str(tmp_path / "gain.csv")]) == 0
    lines = (tmp_path / "gain.csv").read_text().splitlines()
    assert lines[0] == "feature,gain_ratio,flag" and len(lines) == 28
    assert (tmp_path / "g.dat").read_text()


def test_train_eval_and_report(work, tmp_path, capsys):
    model = tmp_path / "rf.fgm"
    assert main(["train", str(work / "graph.csv"), *LEARN, "-o", str(model)]) == 0
    assert model.read_bytes().startswith(b"FAMGRAPH-MODEL\n")
    out = tmp_path / "eval.json"
    assert main(["eval", str(model), str(work / "graph.csv"), "-o", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert set(doc["metrics"]) >= {"tp", "fp", "precision", "recall", "f_measure", "accuracy"}
    capsys.readouterr()
    assert main(["report", str(out)]) == 0
    assert capsys.readouterr().out.split("\n")[0].split() == ["TP", "FP", "P", "R", "FM", "A"]


def test_eval_schema_mismatch(work, tmp_path, capsys):
    model = tmp_path / "rf.fgm"
    main(["train", str(work / "graph.csv"), *LEARN, "-o", str(model)])
    assert main(["eval", str(model), str(work / "markov.csv")]) == 3
    assert "schema" in capsys.readouterr().err


def test_xval(work, tmp_path):
    out = tmp_path / "x.json"
    assert main(["xval", str(work / "graph.csv"), "--classifier", "knn", "--k", "3",
                 "--folds", "4", "-o", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["folds"] == 4 and len(doc["metrics"]["folds"]) == 4
    assert doc["metrics"]["tp"] + doc["metrics"]["fn"] == 12


def test_sweep(work, tmp_path):
    out = tmp_path / "s.csv"
    assert main(["sweep", str(work / "graph.csv"), *LEARN, "--fixed-count", "6",
                 "--counts", "2,4,6", "--test-per-class", "4", "-o", str(out)]) == 0
    assert len(out.read_text().splitlines()) == 4


def test_obfuscate_and_robustness(work, tmp_path):
    out = tmp_path / "ir.jsonl"
    assert main(["obfuscate", str(work / "corpus.jsonl"), "--technique", "ir", "--p", "1.0",
                 "-o", str(out)]) == 0
    assert len(load_records(out)) == 24
    rep = tmp_path / "rob.json"
    assert main(["robustness", str(work / "corpus.jsonl"), *LEARN, "--techniques", "ws,ir",
                 "--plot-data", str(tmp_path / "rob.csv"), "-o", str(rep)]) == 0
    rows = json.loads(rep.read_text())["rows"]
    assert {(r["technique"], r["feature_set"]) for r in rows} >= {("ir", "graph"), ("ir", "markov")}


def test_run_is_reproducible(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("n_benign = 10\nn_malware = 10\nn_estimators = 5\nfolds = 3\ntechniques = ws\n")
    for name in ("a", "b"):
        assert main(["run", "--config", str(cfg), "--output-dir", str(tmp_path / name)]) == 0
    files = sorted(p.name for p in (tmp_path / "a").iterdir())
    assert "manifest.json" in files and "model_graph.fgm" in files
    for f in files:
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes(), f


class TestExitCodes:
    def test_usage_error(self):
        with pytest.raises(SystemExit) as exc:
            main(["frobnicate"])
        assert exc.value.code == 2

    def test_missing_input(self, tmp_path):
        assert main(["features", str(tmp_path / "nope.jsonl"), "-o", str(tmp_path / "f.csv")]) == 3

    def test_empty_corpus_leaves_no_artifacts(self, tmp_path):
        empty = tmp_path / "empty.jsonl"
        empty.write_text("")
        out = tmp_path / "out"
        assert main(["run", "--input", str(empty), "--output-dir", str(out)]) == 3
        assert not out.exists()
        assert main(["features", str(empty), "-o", str(tmp_path / "f.csv")]) == 3
        assert not (tmp_path / "f.csv").exists()

    def test_unknown_config_key(self, tmp_path, capsys):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("trees = 3\n")
        assert main(["synth", "--config", str(cfg), "-o", str(tmp_path / "c.jsonl")]) == 3
        assert "'trees'" in capsys.readouterr().err
