"""Experiment plumbing shared by the CLI: featurization, feature CSVs,
estimator construction, the robustness matrix and summary tables."""

from __future__ import annotations

import csv
import io
from collections.abc import Mapping, Sequence
from dataclasses import dataclass

import numpy as np

from .callgraph import AbstractionMode, abstract_graph
from .dataset import labels_of, stratified_split
from .exceptions import SchemaMismatchError
from .interchange import AppRecord
from .learners import (
    EvalReport,
    GridSearchClassifier,
    KNNClassifier,
    NuSVMClassifier,
    RandomForestClassifier,
    dyadic_range,
)
from .learners.evaluation import fit_estimator
from .markov import MARKOV_SCHEMA, transition_matrix
from .metrics.features import GRAPH_SCHEMA, FeatureSchema, extract_matrix
from .obfuscation import COMBINED, TECHNIQUES, obfuscate_record

FEATURE_SETS: dict[str, FeatureSchema] = {"graph": GRAPH_SCHEMA, "markov": MARKOV_SCHEMA}
CLASSIFIERS = ("rf", "knn", "svm")


def family_graphs(records: Sequence[AppRecord]):
    return [abstract_graph(r.graph, AbstractionMode.FAMILY) for r in records]


def featurize(records: Sequence[AppRecord], feature_set: str, n_jobs: int = 1) -> np.ndarray:
    """Feature matrix of family-abstracted graphs under ``feature_set``."""
    if feature_set not in FEATURE_SETS:
        raise ValueError(f"unknown feature set {feature_set!r}; expected one of {sorted(FEATURE_SETS)}")
    graphs = family_graphs(records)
    if feature_set == "graph":
        return extract_matrix(graphs, n_jobs=n_jobs)
    return np.array([transition_matrix(g).ravel() for g in graphs],
                    dtype=float).reshape(len(graphs), len(MARKOV_SCHEMA))


# ---------------------------------------------------------------------------
# feature CSV: app_id,label,<feature names...>; floats in shortest round-trip form

@dataclass(frozen=True)
class FeatureTable:
    app_ids: list[str]
    labels: list[str | None]
    X: np.ndarray
    schema: FeatureSchema

    @property
    def y(self) -> list[str]:
        missing = [a for a, lab in zip(self.app_ids, self.labels) if lab is None]
        if missing:
            raise ValueError(f"{len(missing)} unlabelled rows, e.g. {missing[0]!r}")
        return list(self.labels)


def feature_table(records: Sequence[AppRecord], feature_set: str, n_jobs: int = 1) -> FeatureTable:
    return FeatureTable([r.app_id for r in records], [r.label for r in records],
                        featurize(records, feature_set, n_jobs), FEATURE_SETS[feature_set])


def table_to_csv(table: FeatureTable) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["app_id", "label", *table.schema.names])
    for app_id, label, row in zip(table.app_ids, table.labels, table.X):
        w.writerow([app_id, label or "", *(repr(float(v)) for v in row)])
    return buf.getvalue()


def schema_for_names(names: Sequence[str]) -> FeatureSchema:
    for schema in FEATURE_SETS.values():
        if tuple(names) == schema.names:
            return schema
    raise SchemaMismatchError("feature columns match no known schema "
                              f"(first columns: {list(names)[:3]})")


def table_from_csv(text: str) -> FeatureTable:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or rows[0][:2] != ["app_id", "label"]:
        raise ValueError("feature CSV must start with an app_id,label header")
    schema = schema_for_names(rows[0][2:])
    body = rows[1:]
    if not body:
        raise ValueError("feature CSV has no rows")
    try:
        X = np.array([[float(v) for v in r[2:]] for r in body], dtype=float)
    except ValueError as exc:
        raise ValueError(f"feature CSV: {exc}") from None
    if X.shape[1] != len(schema):
        raise ValueError("feature CSV rows do not match the header width")
    return FeatureTable([r[0] for r in body], [r[1] or None for r in body], X, schema)


# ---------------------------------------------------------------------------
# estimators

def build_estimator(cfg: Mapping):
    """Classifier from config keys; ``grid_search`` wraps it in the dyadic grid."""
    name = cfg.get("classifier", "rf")
    seed = int(cfg.get("seed", 0))
    if name == "rf":
        est = RandomForestClassifier(n_estimators=int(cfg.get("n_estimators", 100)), random_state=seed)
        grid = {"n_estimators": [10, 50, 100]}
    elif name == "knn":
        est = KNNClassifier(k=int(cfg.get("k", 5)))
        grid = {"k": [1, 3, 5, 7, 9]}
    elif name == "svm":
        est = NuSVMClassifier(gamma=float(cfg.get("gamma", 2.0 ** -5)), nu=float(cfg.get("nu", 0.5)))
        grid = {"gamma": dyadic_range(-10, 0), "nu": dyadic_range(-10, 0)}
    else:
        raise ValueError(f"unknown classifier {name!r}; expected one of {CLASSIFIERS}")
    if cfg.get("grid_search"):
        return GridSearchClassifier(est, grid, ratio=float(cfg.get("ratio", 0.8)), random_state=seed)
    return est


# ---------------------------------------------------------------------------
# robustness matrix

@dataclass(frozen=True)
class RobustnessRow:
    technique: str
    feature_set: str
    report: EvalReport

    def to_dict(self) -> dict:
        return {"technique": self.technique, "feature_set": self.feature_set, **self.report.to_dict()}


def combined_label(techniques: Sequence[str]) -> str:
    return "+".join(techniques)


def robustness_matrix(corpus: Sequence[AppRecord], techniques: Sequence[str],
                      feature_sets: Sequence[str], cfg: Mapping, n_jobs: int = 1,
                      test_corpus: Sequence[AppRecord] | None = None) -> list[RobustnessRow]:
    """Train each feature set on clean data; evaluate on clean and transformed test apps.

    With ``test_corpus`` None the corpus is split by ``cfg['ratio']``.  Rows:
    ``clean``, one per technique, and (for several techniques) their
    sequential combination.
    """
    if not techniques:
        raise ValueError("robustness needs at least one technique")
    for t in techniques:
        if t not in TECHNIQUES:
            raise ValueError(f"unknown technique {t!r}; expected one of {TECHNIQUES}")
    if not feature_sets:
        raise ValueError("robustness needs at least one feature set")
    for fs in feature_sets:
        if fs not in FEATURE_SETS:
            raise ValueError(f"unknown feature set {fs!r}; expected one of {sorted(FEATURE_SETS)}")
    seed, p = int(cfg.get("seed", 0)), float(cfg.get("p", 1.0))
    if test_corpus is None:
        train, test = stratified_split(corpus, float(cfg.get("ratio", 0.8)), seed)
    else:
        train, test = list(corpus), list(test_corpus)
    variants: list[tuple[str, list[AppRecord]]] = [("clean", test)]
    for t in techniques:
        variants.append((t, [obfuscate_record(r, t, p, seed) for r in test]))
    chain = [t for t in techniques if t != "ws"]
    if len(techniques) > 1 and chain:
        chain = [t for step in chain for t in (COMBINED if step == "all" else (step,))]
        variants.append((combined_label(chain), [obfuscate_record(r, chain, p, seed) for r in test]))

    rows = []
    y_train, y_test = labels_of(train), labels_of(test)
    for fs in feature_sets:
        schema = FEATURE_SETS[fs]
        est = fit_estimator(build_estimator(cfg), featurize(train, fs, n_jobs), y_train, schema.names)
        for name, recs in variants:
            pred = est.predict(featurize(recs, fs, n_jobs))
            rows.append(RobustnessRow(name, fs, EvalReport.from_predictions(y_test, pred)))
    return rows


# ---------------------------------------------------------------------------
# summary tables

SUMMARY_COLUMNS = ("TP", "FP", "P", "R", "FM", "A")


def summary_line(label: str, rep: Mapping, width: int) -> str:
    cells = [f"{rep['tp']:>5d}", f"{rep['fp']:>5d}"]
    cells += [f"{100 * rep[k]:6.1f}" for k in ("precision", "recall", "f_measure", "accuracy")]
    return f"{label:<{width}}  " + "  ".join(cells)


def summary_table(rows: Sequence[tuple[str, Mapping]]) -> str:
    """Fixed-width TP/FP/P/R/FM/A table, percentages to one decimal."""
    width = max([len(r[0]) for r in rows] + [8])
    head = f"{'':<{width}}  " + "  ".join(f"{c:>5}" if c in ("TP", "FP") else f"{c:>6}"
                                          for c in SUMMARY_COLUMNS)
    return "\n".join([head] + [summary_line(label, rep, width) for label, rep in rows]) + "\n"


def robustness_plot_data(rows: Sequence[RobustnessRow]) -> str:
    """CSV of technique, feature_set, f_measure, accuracy for grouped bar charts."""
    lines = ["technique,feature_set,f_measure,accuracy"]
    lines += [f"{r.technique},{r.feature_set},{r.report.f_measure:.12g},{r.report.accuracy:.12g}"
              for r in rows]
    return "\n".join(lines) + "\n"
