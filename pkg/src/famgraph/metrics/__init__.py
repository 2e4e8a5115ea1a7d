"""Graph metrics and the graph feature vector."""

from .features import (
    GRAPH_SCHEMA,
    FeatureSchema,
    FeatureVector,
    GraphFeatureExtractor,
    extract_features,
    extract_matrix,
)
from .paths import (
    Eccentricity,
    betweenness,
    betweenness_stats,
    closeness_vitality,
    degree_centrality,
    eccentricity_family,
    vitality_stats,
)
from .spectral import algebraic_connectivity, jacobi_eigenvalues, laplacian_matrix
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

__all__ = [
    "GRAPH_SCHEMA", "FeatureSchema", "FeatureVector", "GraphFeatureExtractor",
    "extract_features", "extract_matrix", "Eccentricity", "betweenness",
    "betweenness_stats", "closeness_vitality", "degree_centrality",
    "eccentricity_family", "vitality_stats", "algebraic_connectivity",
    "jacobi_eigenvalues", "laplacian_matrix", "assortativity",
    "attracting_components", "biconnected_component_count", "circuit_rank",
    "clique_number", "clustering_coefficient", "connected_components",
    "node_connectivity", "strongly_connected_components",
]
