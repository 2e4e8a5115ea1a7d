import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from famgraph import FAMILIES, CallGraph, abstract_graph
from famgraph.callgraph import AbstractionMode
from famgraph.markov import MARKOV_SCHEMA, MarkovFeatureExtractor, markov_features, transition_matrix

IDX = {f: i for i, f in enumerate(FAMILIES)}


def family_graph(edges):
    return CallGraph(edges, mode=AbstractionMode.FAMILY)


def test_schema_shape():
    assert len(MARKOV_SCHEMA) == 144
    assert MARKOV_SCHEMA.names[0] == "markov.android->android"
    assert MARKOV_SCHEMA.names[13] == "markov.dalvik->dalvik"


def test_row_with_self_loop():
    m = transition_matrix(family_graph([("android", "java", 3), ("android", "android", 1)]))
    row = m[IDX["android"]]
    assert row[IDX["android"]] == 0.25 and row[IDX["java"]] == 0.75
    assert row.sum() == 1.0
    assert not m[IDX["java"]].any()


def test_single_edge():
    m = transition_matrix(family_graph([("java", "xml", 5)]))
    assert m[IDX["java"], IDX["xml"]] == 1.0
    assert m.sum() == 1.0


def test_empty_graph_is_zero_vector():
    v = markov_features(CallGraph(mode=AbstractionMode.FAMILY))
    assert v.values == (0.0,) * 144


def test_raw_graph_rejected():
    with pytest.raises(ValueError, match="family-mode"):
        transition_matrix(CallGraph([("android.util.Log:d", "java.io.File:open", 1)]))


def test_abstracted_raw_graph():
    g = CallGraph([("my.app.Main:run", "android.util.Log:d", 1),
                   ("my.app.Main:run", "org.json.JSONObject:put", 3)])
    m = transition_matrix(abstract_graph(g, "family"))
    assert m[IDX["self-defined"], IDX["android"]] == 0.25
    assert m[IDX["self-defined"], IDX["json"]] == 0.75


def test_extractor_matches_function():
    gs = [family_graph([("java", "xml", 5)]), family_graph([("android", "java", 2), ("java", "android", 1)])]
    X = MarkovFeatureExtractor().fit_transform(gs)
    assert X.shape == (2, 144)
    assert X[1].tolist() == list(markov_features(gs[1]).values)
    assert list(MarkovFeatureExtractor().get_feature_names_out()) == list(MARKOV_SCHEMA.names)


family_edges = st.lists(
    st.tuples(st.sampled_from(FAMILIES), st.sampled_from(FAMILIES), st.integers(1, 1000)),
    max_size=40)


@given(family_edges)
def test_rows_stochastic_or_zero(edges):
    m = transition_matrix(family_graph(edges))
    assert ((m >= 0) & (m <= 1)).all()
    for row in m:
        s = row.sum()
        assert s == 0 or abs(s - 1) < 1e-12


@given(family_edges, st.integers(2, 50))
def test_weight_scaling_invariance(edges, k):
    a = transition_matrix(family_graph(edges))
    b = transition_matrix(family_graph([(u, v, w * k) for u, v, w in edges]))
    np.testing.assert_allclose(a, b, rtol=0, atol=1e-15)
