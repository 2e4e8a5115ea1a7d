"""Malware classification from weighted directed call-graph features."""

from .callgraph import (
    FAMILIES,
    AbstractionMode,
    ApiName,
    CallGraph,
    ClassInfo,
    FamilyLabel,
    UndirectedView,
    Whitelist,
    abstract_graph,
    abstract_to_family,
    classify_obfuscated_class,
    default_whitelist,
    parse_api_name,
    to_undirected,
)
from .dataset import SynthSpec, annotate, generate_synthetic, stratified_split
from .interchange import AppRecord, iter_records, load_records, write_records
from .learners import (
    EvalReport,
    KNNClassifier,
    NuSVMClassifier,
    RandomForestClassifier,
    TrainedModel,
    cross_validate,
    evaluate,
)
from .markov import MARKOV_SCHEMA, MarkovFeatureExtractor, markov_features
from .metrics import GRAPH_SCHEMA, GraphFeatureExtractor, extract_features, extract_matrix
from .obfuscation import Obfuscator, apply_technique, obfuscate_record
from .ranking import rank_features

__version__ = "0.1.0"

__all__ = [
    "FAMILIES", "AbstractionMode", "ApiName", "CallGraph", "ClassInfo",
    "FamilyLabel", "UndirectedView", "Whitelist", "abstract_graph",
    "abstract_to_family", "classify_obfuscated_class", "default_whitelist",
    "parse_api_name", "to_undirected", "AppRecord", "iter_records",
    "load_records", "write_records", "SynthSpec", "annotate", "generate_synthetic",
    "stratified_split", "EvalReport", "KNNClassifier", "NuSVMClassifier",
    "RandomForestClassifier", "TrainedModel", "cross_validate", "evaluate",
    "MARKOV_SCHEMA", "MarkovFeatureExtractor", "markov_features", "GRAPH_SCHEMA",
    "GraphFeatureExtractor", "extract_features", "extract_matrix", "Obfuscator",
    "apply_technique", "obfuscate_record", "rank_features", "__version__",
]
