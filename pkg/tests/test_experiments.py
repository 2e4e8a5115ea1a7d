import numpy as np
import pytest

from famgraph.config import DEFAULTS
from famgraph.dataset import SynthSpec, generate_synthetic
from famgraph.exceptions import SchemaMismatchError
from famgraph.experiments import (
    FeatureTable,
    build_estimator,
    feature_table,
    robustness_matrix,
    robustness_plot_data,
    summary_table,
    table_from_csv,
    table_to_csv,
)
from famgraph.learners import EvalReport, GridSearchClassifier, KNNClassifier, NuSVMClassifier

CFG = {**DEFAULTS, "n_estimators": 15}


@pytest.fixture(scope="module")
def corpus():
    return generate_synthetic(SynthSpec(15, 15, seed=4))


@pytest.mark.parametrize("fs", ["graph", "markov"])
def test_csv_round_trip_is_exact(corpus, fs):
    table = feature_table(corpus[:6], fs)
    back = table_from_csv(table_to_csv(table))
    assert back.app_ids == table.app_ids and back.labels == table.labels
    assert back.schema == table.schema
    np.testing.assert_array_equal(back.X, table.X)


def test_csv_unknown_header():
    with pytest.raises(SchemaMismatchError):
        table_from_csv("app_id,label,bogus\nx,benign,1\n")


def test_build_estimator_kinds():
    assert isinstance(build_estimator({**CFG, "classifier": "knn"}), KNNClassifier)
    assert isinstance(build_estimator({**CFG, "classifier": "svm"}), NuSVMClassifier)
    gs = build_estimator({**CFG, "classifier": "knn", "grid_search": True})
    assert isinstance(gs, GridSearchClassifier) and gs.param_grid == {"k": [1, 3, 5, 7, 9]}
    with pytest.raises(ValueError):
        build_estimator({**CFG, "classifier": "bayes"})


def test_whitespace_row_equals_clean(corpus):
    rows = robustness_matrix(corpus, ["ws"], ["graph", "markov"], CFG)
    by = {(r.technique, r.feature_set): r.report for r in rows}
    assert len(rows) == 4
    for fs in ("graph", "markov"):
        assert by[("ws", fs)] == by[("clean", fs)]


def test_full_matrix_shape(corpus):
    rows = robustness_matrix(corpus, ["ci", "see", "pack", "ir"], ["graph", "markov"], CFG)
    names = [r.technique for r in rows if r.feature_set == "graph"]
    assert names == ["clean", "ci", "see", "pack", "ir", "ci+see+pack+ir"]
    assert all(r.report.total == 6 for r in rows)


def test_matrix_errors(corpus):
    with pytest.raises(ValueError, match="at least one technique"):
        robustness_matrix(corpus, [], ["graph"], CFG)
    with pytest.raises(ValueError, match="unknown technique"):
        robustness_matrix(corpus, ["rot13"], ["graph"], CFG)
    with pytest.raises(ValueError, match="unknown feature set"):
        robustness_matrix(corpus, ["ci"], ["opcode"], CFG)


def test_summary_layout():
    text = summary_table([("xval graph", EvalReport(9, 1, 9, 1).to_dict())])
    head, line = text.splitlines()
    assert head.split() == ["TP", "FP", "P", "R", "FM", "A"]
    assert line.split() == ["xval", "graph", "9", "1", "90.0", "90.0", "90.0", "90.0"]


def test_plot_data(corpus):
    rows = robustness_matrix(corpus, ["ws"], ["graph"], CFG)
    lines = robustness_plot_data(rows).splitlines()
    assert lines[0] == "technique,feature_set,f_measure,accuracy"
    assert [l.split(",")[0] for l in lines[1:]] == ["clean", "ws"]


def test_feature_table_y():
    t = FeatureTable(("a",), ("malware",), np.zeros((1, 1)), None)
    assert t.y == ["malware"]
