"""Acceptance criteria, one test per criterion, at the stated tolerances.

The terminal summary prints one PASS/FAIL line per test in this module.
"""

import os
import subprocess
import sys
import time
from pathlib import Path

import networkx as nx
import numpy as np
import pytest

import oracles
from famgraph import FAMILIES, CallGraph, ClassInfo, abstract_graph, to_undirected
from famgraph.config import DEFAULTS
from famgraph.dataset import SynthSpec, generate_synthetic
from famgraph.experiments import featurize, robustness_matrix
from famgraph.learners import RandomForestClassifier, cross_validate, f_measure
from famgraph.metrics import (
    algebraic_connectivity,
    attracting_components,
    betweenness,
    circuit_rank,
    clique_number,
    closeness_vitality,
    connected_components,
    eccentricity_family,
    extract_features,
    node_connectivity,
    strongly_connected_components,
)
from famgraph.obfuscation import (
    RELAY_CLASS,
    transform_call_indirection,
    transform_identifier_renaming,
    transform_packing,
    transform_whitespace,
)
from famgraph.ranking import Discretization, gain_ratio
from helpers import complete, path, view

SEED_CORPUS = SynthSpec(200, 200, separation=1.0, seed=0)


@pytest.fixture(scope="module")
def corpus():
    return generate_synthetic(SEED_CORPUS, n_jobs=4)


# 1 ---------------------------------------------------------------------------

def test_criterion_01_f_measure_formula():
    start = time.perf_counter()
    equal = f_measure(0.957, 0.957)
    indirection = f_measure(0.707, 0.929)
    elapsed = time.perf_counter() - start
    assert abs(equal - 0.957) <= 0.0005
    assert elapsed < 1.0
    # 2PR/(P+R) at these inputs is 0.80294, 0.094 points above the required 80.2
    assert abs(indirection - 0.802) <= 0.0005, f"F = {indirection:.6f}"


# 2 ---------------------------------------------------------------------------

def _check_against_oracles(nodes, directed):
    g = CallGraph([(u, v, 1) for u, v in directed], nodes=nodes)
    v = to_undirected(g)
    adj = oracles.simple_adjacency(nodes, directed)

    if len(nodes) >= 2:
        assert betweenness(v) == oracles.betweenness(adj)
        assert closeness_vitality(v) == oracles.vitality(adj)
    assert clique_number(v) == oracles.clique_number(adj)
    assert node_connectivity(v) == oracles.node_connectivity(adj)
    assert circuit_rank(v) == oracles.circuit_rank(adj)

    e = eccentricity_family(v)
    ref = oracles.largest_component_summary(adj)
    assert (e.diameter, e.radius, e.center_number, e.periphery_number) == (
        ref["diameter"], ref["radius"], ref["center"], ref["periphery"])
    assert e.avg_shortest_path == float(ref["avg"])

    sccs = strongly_connected_components(g)
    assert {frozenset(c) for c in sccs} == oracles.scc_classes(nodes, directed)
    assert len(connected_components(v)) == len(oracles.components(adj))
    assert len(attracting_components(g, sccs)) == oracles.attracting_count(nodes, directed)

    assert abs(algebraic_connectivity(v) - oracles.laplacian_lambda2(adj)) <= 1e-7


def test_criterion_02_metric_oracle_equivalence():
    start = time.perf_counter()
    rng = np.random.default_rng(2024)
    atlas = [a for a in nx.graph_atlas_g() if 1 <= a.number_of_nodes() <= 6 and nx.is_connected(a)]
    assert len(atlas) == 143
    for a in atlas:
        nodes = [f"n{i}" for i in a.nodes()]
        # random orientations exercise the directed component counts too
        directed = [(f"n{u}", f"n{w}") if rng.random() < 0.5 else (f"n{w}", f"n{u}")
                    for u, w in a.edges()]
        _check_against_oracles(nodes, directed)
    for _ in range(500):
        n = int(rng.integers(1, 8))
        nodes = [f"v{i}" for i in range(n)]
        p = rng.uniform(0.05, 0.6)
        directed = [(a, b) for a in nodes for b in nodes if rng.random() < p]
        _check_against_oracles(nodes, directed)
    assert time.perf_counter() - start < 120


# 3 ---------------------------------------------------------------------------

def test_criterion_03_spectral_spot_checks():
    assert abs(algebraic_connectivity(view(path(3))) - 1.0) <= 1e-9
    assert abs(algebraic_connectivity(view(complete(4))) - 4.0) <= 1e-9
    assert abs(algebraic_connectivity(view([("a", "b")], nodes=["c"])) - 0.0) <= 1e-9


# 4 ---------------------------------------------------------------------------

def test_criterion_04_gain_ratio_hand_check():
    x, c = [1, 1, 1, 0], ["malware", "malware", "benign", "benign"]
    assert abs(gain_ratio(x, c, Discretization.identity(x)) - 0.3837) <= 1e-4
    perfect = [0, 1, 0, 1]
    labels = ["benign", "malware", "benign", "malware"]
    assert gain_ratio(perfect, labels, Discretization.identity(perfect)) == 1.0
    assert gain_ratio([7, 7, 7, 7], labels, Discretization.identity([7])) == 0.0


# 5 ---------------------------------------------------------------------------

def test_criterion_05_end_to_end_separability(corpus):
    start = time.perf_counter()
    X = featurize(corpus, "graph", n_jobs=4)
    y = np.array([r.label for r in corpus])
    rf = RandomForestClassifier(n_estimators=100)
    clean = cross_validate(rf, X, y, folds=10, seed=0)
    shuffled = cross_validate(rf, X, np.random.default_rng(7).permutation(y), folds=10, seed=0)
    elapsed = time.perf_counter() - start
    assert clean.accuracy >= 0.95
    assert 0.40 <= shuffled.accuracy <= 0.60
    assert elapsed < 300


# 6 ---------------------------------------------------------------------------

def test_criterion_06_whitespace_invariance(corpus):
    ws = [r.with_graph(transform_whitespace(r.graph)) for r in corpus]
    for fs in ("graph", "markov"):
        a, b = featurize(corpus, fs, n_jobs=4), featurize(ws, fs, n_jobs=4)
        assert a.tobytes() == b.tobytes()
    rows = robustness_matrix(corpus, ["ws"], ["graph", "markov"], {**DEFAULTS, "n_estimators": 30})
    by = {(r.technique, r.feature_set): r.report for r in rows}
    for fs in ("graph", "markov"):
        assert by[("ws", fs)] == by[("clean", fs)]
        assert by[("ws", fs)].metrics() == by[("clean", fs)].metrics()


# 7 ---------------------------------------------------------------------------

def test_criterion_07_renaming_robustness_direction():
    drops = {"graph": [], "markov": []}
    for seed in range(5):
        data = generate_synthetic(SynthSpec(200, 200, separation=1.0, seed=seed), n_jobs=4)
        rows = robustness_matrix(data, ["ir"], ["graph", "markov"], {**DEFAULTS, "seed": seed}, n_jobs=4)
        f = {(r.technique, r.feature_set): r.report.f_measure for r in rows}
        for fs in drops:
            drops[fs].append(f[("clean", fs)] - f[("ir", fs)])
    assert np.mean(drops["graph"]) < np.mean(drops["markov"]), drops


# 8 ---------------------------------------------------------------------------

def _obfuscated_weight(g):
    return sum(w for u, v, w in abstract_graph(g, "family").edges if "obfuscated" in (u, v))


def test_criterion_08_transform_structure(corpus):
    sample = corpus[:20] + corpus[200:220]
    for i, rec in enumerate(sample):
        g = rec.graph

        ci = transform_call_indirection(g, 1.0, seed=i)
        assert ci.n_edges == 2 * g.n_edges
        out = {}
        for u, v, w in ci.edges:
            out.setdefault(u, []).append((v, w))
        for u, v, w in g.edges:
            hops = [(m, w1) for m, w1 in out[u] if m.startswith(RELAY_CLASS + ":")]
            assert any(w1 == w and ci.weight(m, v) == w for m, w1 in hops)

        once = transform_packing(g)
        twice = transform_packing(once)
        assert (once.n_nodes, twice.n_nodes) == (g.n_nodes + 3, g.n_nodes + 6)

        ir = transform_identifier_renaming(g, 1.0, seed=i)
        assert extract_features(ir) == extract_features(g)
        assert _obfuscated_weight(ir) > _obfuscated_weight(g)


# 9 ---------------------------------------------------------------------------

def _run(out_dir: Path, cfg: Path, hash_seed: str, jobs: str):
    env = {**os.environ, "PYTHONHASHSEED": hash_seed}
    subprocess.run([sys.executable, "-m", "famgraph.cli", "run", "--config", str(cfg),
                    "--output-dir", str(out_dir), "--jobs", jobs],
                   check=True, env=env, capture_output=True)
    return {p.name: p.read_bytes() for p in sorted(out_dir.iterdir())}


def test_criterion_09_determinism(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("seed = 11\nn_benign = 40\nn_malware = 40\nn_estimators = 25\nfolds = 5\n"
                   "techniques = ws, ci, see, pack, ir\nfeature_sets = graph, markov\n")
    a = _run(tmp_path / "a", cfg, "1", "1")
    b = _run(tmp_path / "b", cfg, "2", "3")
    assert {"features_graph.csv", "features_markov.csv", "model_graph.fgm", "model_markov.fgm",
            "xval_graph.json", "robustness.json", "manifest.json"} <= set(a)
    assert a == b


# 10 --------------------------------------------------------------------------

_PREFIXES = ["android.app", "android.util", "dalvik.system", "java.lang", "java.io", "javax.crypto",
             "junit.framework", "org.apache.http", "org.json", "com.android.internal.util",
             "org.xml.sax", "com.google.android.gms.ads", "com.google", "my.app", "net.vendor.lib",
             "a.bc", "x", "androidx.core", "javaa.lang"]


def _fuzz_graph(rng):
    n = int(rng.integers(1, 30))
    classes, nodes = {}, []
    for _ in range(n):
        prefix = _PREFIXES[rng.integers(len(_PREFIXES))]
        cls = f"{prefix}.{'Cls' if rng.random() < 0.7 else 'q'}{int(rng.integers(5))}"
        method = "run" if rng.random() < 0.7 else "z"
        nodes.append(f"{cls}:{method}")
        if rng.random() < 0.3:
            classes[cls] = ClassInfo((method,), resolvable=bool(rng.random() < 0.8))
    m = int(rng.integers(0, 3 * n))
    edges = [(nodes[rng.integers(n)], nodes[rng.integers(n)], int(rng.integers(1, 5))) for _ in range(m)]
    return CallGraph(edges, nodes=nodes, classes=classes)


def test_criterion_10_family_mode_bound():
    rng = np.random.default_rng(10)
    seen = set()
    for _ in range(10_000):
        fam = abstract_graph(_fuzz_graph(rng), "family")
        assert fam.n_nodes <= 12
        assert set(fam.nodes) <= set(FAMILIES)
        seen |= set(fam.nodes)
    assert seen == set(FAMILIES)
