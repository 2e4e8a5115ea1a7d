"""Family-level call-transition probabilities, the Markov-chain baseline feature set."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .callgraph import FAMILIES, AbstractionMode, CallGraph
from .metrics.features import FeatureSchema, FeatureVector

MARKOV_SCHEMA = FeatureSchema(
    names=tuple(f"markov.{a}->{b}" for a in FAMILIES for b in FAMILIES),
    version="markov-1",
)

_INDEX = {f: i for i, f in enumerate(FAMILIES)}


def transition_matrix(g: CallGraph) -> np.ndarray:
    """12x12 row-stochastic matrix in family order; rows with no calls stay zero."""
    if g.mode is not AbstractionMode.FAMILY:
        raise ValueError(f"transition features need a family-mode graph, got {g.mode.value}")
    counts = np.zeros((len(FAMILIES), len(FAMILIES)))
    for (u, v), w in g.edge_weights.items():
        counts[_INDEX[u], _INDEX[v]] += w
    totals = counts.sum(axis=1, keepdims=True)
    return np.divide(counts, totals, out=np.zeros_like(counts), where=totals > 0)


def markov_features(g: CallGraph) -> FeatureVector:
    return FeatureVector(MARKOV_SCHEMA.version, tuple(transition_matrix(g).ravel().tolist()))


class MarkovFeatureExtractor(TransformerMixin, BaseEstimator):
    """Transformer from family-mode CallGraphs to flattened transition matrices."""

    schema = MARKOV_SCHEMA

    def fit(self, X, y=None):
        self.n_features_out_ = len(self.schema)
        return self

    def transform(self, X) -> np.ndarray:
        rows = [transition_matrix(g).ravel() for g in X]
        return np.array(rows, dtype=float).reshape(len(rows), len(self.schema))

    def get_feature_names_out(self, input_features=None):
        return np.array(self.schema.names, dtype=object)
