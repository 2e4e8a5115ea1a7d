"""Graph feature schema and extraction."""

from __future__ import annotations

import hashlib
import math
from collections.abc import Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from ..callgraph import CallGraph, UndirectedView, to_undirected
from ..exceptions import UndefinedMetricError
from .paths import betweenness, closeness_vitality, degree_centrality, eccentricity_family
from .spectral import algebraic_connectivity
from .structure import (
    assortativity,
    attracting_components,
    biconnected_component_count,
    circuit_rank,
    clique_number,
    clustering_coefficient,
    connected_components,
    node_connectivity,
    strongly_connected_components,
)


@dataclass(frozen=True)
class FeatureSchema:
    names: tuple[str, ...]
    version: str

    def __post_init__(self):
        if len(set(self.names)) != len(self.names):
            raise ValueError("feature names must be unique")

    def __len__(self) -> int:
        return len(self.names)

    @property
    def digest(self) -> str:
        h = hashlib.sha256(self.version.encode())
        for name in self.names:
            h.update(b"\0" + name.encode())
        return h.hexdigest()[:16]


@dataclass(frozen=True)
class FeatureVector:
    schema_version: str
    values: tuple[float, ...]

    def __post_init__(self):
        if not all(math.isfinite(v) for v in self.values):
            raise ValueError("feature vectors must be finite")


GRAPH_SCHEMA = FeatureSchema(
    names=(
        "graph_size", "graph_order", "circuit_rank", "assortativity",
        "scc_count", "wcc_count", "node_connectivity", "avg_shortest_path",
        "degree_centrality_min", "degree_centrality_mean", "degree_centrality_max",
        "betweenness_min", "betweenness_mean", "betweenness_max",
        "vitality_min", "vitality_mean", "vitality_max",
        "attracting_components", "density", "clustering_coefficient",
        "algebraic_connectivity", "clique_number", "biconnected_components",
        "diameter", "radius", "center_number", "periphery_number",
    ),
    version="graph-1",
)


def _stats(values: Sequence[Fraction]) -> tuple[float, float, float]:
    return float(min(values)), float(sum(values) / len(values)), float(max(values))


def extract_features(g: CallGraph) -> FeatureVector:
    """Compute every graph feature, in :data:`GRAPH_SCHEMA` order.

    Directed metrics (size, components, attracting components, density)
    use ``g``; the rest use its undirected view.  Undefined cases map to
    sentinels: 0 for assortativity of an edgeless graph and for
    betweenness/vitality of a single node.
    """
    n = g.n_nodes
    if n == 0:
        raise UndefinedMetricError("cannot extract features from an empty graph")
    view: UndirectedView = to_undirected(g)

    sccs = strongly_connected_components(g)
    n_wcc = len(connected_components(view))
    non_loop = sum(1 for (u, v) in g.edge_weights if u != v)
    density = Fraction(non_loop, n * (n - 1)) if n > 1 else Fraction(0)
    try:
        assort = assortativity(view)
    except UndefinedMetricError:
        assort = Fraction(0)
    if n >= 2:
        btw = _stats(list(betweenness(view).values()))
        vit = _stats([Fraction(x) for x in closeness_vitality(view).values()])
    else:
        btw = vit = (0.0, 0.0, 0.0)
    deg = _stats(list(degree_centrality(view).values()))
    ecc = eccentricity_family(view)

    values = (
        g.n_edges, n, circuit_rank(view, n_wcc), float(assort),
        len(sccs), n_wcc, node_connectivity(view), ecc.avg_shortest_path,
        *deg, *btw, *vit,
        len(attracting_components(g, sccs)), float(density), float(clustering_coefficient(view)),
        algebraic_connectivity(view), clique_number(view), biconnected_component_count(view),
        ecc.diameter, ecc.radius, ecc.center_number, ecc.periphery_number,
    )
    return FeatureVector(GRAPH_SCHEMA.version, tuple(float(v) for v in values))


def _extract_values(g: CallGraph) -> tuple[float, ...]:
    return extract_features(g).values


def extract_matrix(graphs: Sequence[CallGraph], n_jobs: int = 1) -> np.ndarray:
    """Feature matrix for many graphs, rows in input order."""
    if n_jobs and n_jobs > 1 and len(graphs) > 1:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            rows = list(pool.map(_extract_values, graphs, chunksize=8))
    else:
        rows = [_extract_values(g) for g in graphs]
    return np.array(rows, dtype=float).reshape(len(rows), len(GRAPH_SCHEMA))


class GraphFeatureExtractor(TransformerMixin, BaseEstimator):
    """Transformer mapping a sequence of CallGraphs to the graph feature matrix.

    Stateless; ``fit`` only records the schema.
    """

    schema = GRAPH_SCHEMA

    def __init__(self, n_jobs: int = 1):
        self.n_jobs = n_jobs

    def fit(self, X, y=None):
        self.n_features_out_ = len(self.schema)
        return self

    def transform(self, X) -> np.ndarray:
        return extract_matrix(list(X), n_jobs=self.n_jobs)

    def get_feature_names_out(self, input_features=None):
        return np.array(self.schema.names, dtype=object)
