"""Confusion-matrix reports, cross-validation, grid search and training-balance sweeps.

Malware is the positive class throughout.
"""

from __future__ import annotations

import inspect
import itertools
import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, clone

from ..exceptions import SchemaMismatchError
from .forest import unit_rng
from .preprocessing import encode_labels


def _ratio(num: int, den: int) -> float:
    return num / den if den else 0.0


@dataclass(frozen=True)
class EvalReport:
    tp: int
    fp: int
    tn: int
    fn: int
    folds: tuple["EvalReport", ...] = field(default=(), compare=False)

    @classmethod
    def from_predictions(cls, y_true, y_pred) -> "EvalReport":
        t = encode_labels(y_true)
        p = encode_labels(y_pred)
        if len(t) != len(p):
            raise ValueError("y_true and y_pred differ in length")
        if len(t) == 0:
            raise ValueError("empty test set")
        return cls(tp=int(((t == 1) & (p == 1)).sum()), fp=int(((t == 0) & (p == 1)).sum()),
                   tn=int(((t == 0) & (p == 0)).sum()), fn=int(((t == 1) & (p == 0)).sum()))

    @classmethod
    def pooled(cls, reports: Sequence["EvalReport"]) -> "EvalReport":
        """Micro-average: sum the confusion counts, keep the folds."""
        return cls(tp=sum(r.tp for r in reports), fp=sum(r.fp for r in reports),
                   tn=sum(r.tn for r in reports), fn=sum(r.fn for r in reports),
                   folds=tuple(reports))

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    @property
    def precision(self) -> float:
        return _ratio(self.tp, self.tp + self.fp)

    @property
    def recall(self) -> float:
        return _ratio(self.tp, self.tp + self.fn)

    tpr = recall

    @property
    def fpr(self) -> float:
        return _ratio(self.fp, self.fp + self.tn)

    @property
    def f_measure(self) -> float:
        return f_measure(self.precision, self.recall)

    @property
    def accuracy(self) -> float:
        return _ratio(self.tp + self.tn, self.total)

    def metrics(self) -> dict[str, float]:
        return {"precision": self.precision, "recall": self.recall, "f_measure": self.f_measure,
                "accuracy": self.accuracy, "tpr": self.tpr, "fpr": self.fpr}

    def to_dict(self) -> dict:
        out = {"tp": self.tp, "fp": self.fp, "tn": self.tn, "fn": self.fn, **self.metrics()}
        if self.folds:
            out["folds"] = [f.to_dict() for f in self.folds]
        return out


def f_measure(precision: float, recall: float) -> float:
    """Harmonic mean of precision and recall (0 when both are 0)."""
    s = precision + recall
    return 2.0 * precision * recall / s if s > 0 else 0.0


def evaluate(model, X, y, schema_version: str | None = None) -> EvalReport:
    """Confusion counts of ``model`` on a labelled test set."""
    expected = getattr(model, "schema_version", None)
    if expected is not None and schema_version is not None and expected != schema_version:
        raise SchemaMismatchError(f"model expects schema {expected!r}, data is {schema_version!r}")
    y = encode_labels(y)
    if len(y) == 0:
        raise ValueError("empty test set")
    return EvalReport.from_predictions(y, model.predict(X))


# ---------------------------------------------------------------------------
# splitting

def _take(X, idx):
    if isinstance(X, np.ndarray):
        return X[idx]
    return [X[i] for i in idx]


def stratified_indices(y, ratio: float, seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Per-class seeded shuffle; ``floor(ratio * n_c)`` of class c go to train
    (clamped to keep at least one sample on each side)."""
    y = encode_labels(y)
    if not 0.0 < ratio < 1.0:
        raise ValueError("ratio must lie in (0, 1)")
    rng = np.random.default_rng(seed)
    train, test = [], []
    for cls in (0, 1):
        idx = np.nonzero(y == cls)[0]
        if len(idx) < 2:
            raise ValueError(f"class {cls} has {len(idx)} samples; need at least 2 to split")
        idx = rng.permutation(idx)
        k = min(max(math.floor(ratio * len(idx)), 1), len(idx) - 1)
        train.append(idx[:k])
        test.append(idx[k:])
    return np.sort(np.concatenate(train)), np.sort(np.concatenate(test))


def stratified_folds(y, folds: int, seed: int = 0) -> list[np.ndarray]:
    """Test-index arrays for stratified k-fold: each class is shuffled, then dealt round-robin."""
    y = encode_labels(y)
    if folds < 2:
        raise ValueError("need at least 2 folds")
    rng = np.random.default_rng(seed)
    buckets: list[list[int]] = [[] for _ in range(folds)]
    for cls in (0, 1):
        idx = np.nonzero(y == cls)[0]
        if len(idx) < folds:
            raise ValueError(f"class {cls} has {len(idx)} samples, fewer than {folds} folds")
        for pos, i in enumerate(rng.permutation(idx)):
            buckets[pos % folds].append(int(i))
    return [np.array(sorted(b), dtype=int) for b in buckets]


def _seeded(estimator, seed: int, unit: int):
    est = clone(estimator)
    if "random_state" in est.get_params():
        est.set_params(random_state=int(unit_rng(seed, unit).integers(2 ** 31 - 1)))
    return est


def fit_estimator(est, X, y, feature_names=None):
    """Fit, passing ``feature_names`` when the estimator accepts it."""
    if feature_names is not None and "feature_names" in inspect.signature(est.fit).parameters:
        return est.fit(X, y, feature_names=feature_names)
    return est.fit(X, y)


def cross_validate(estimator, X, y, folds: int = 10, seed: int = 0,
                   feature_names: Sequence[str] | None = None) -> EvalReport:
    """Stratified k-fold; confusion counts pooled over folds."""
    y = encode_labels(y)
    reports = []
    all_idx = np.arange(len(y))
    for k, test_idx in enumerate(stratified_folds(y, folds, seed)):
        train_idx = np.setdiff1d(all_idx, test_idx)
        est = fit_estimator(_seeded(estimator, seed, k), _take(X, train_idx), y[train_idx], feature_names)
        reports.append(EvalReport.from_predictions(y[test_idx], est.predict(_take(X, test_idx))))
    return EvalReport.pooled(reports)


def holdout(estimator, X, y, ratio: float = 0.8, seed: int = 0,
            feature_names: Sequence[str] | None = None) -> EvalReport:
    """Single stratified train/test split (80/20 by default)."""
    y = encode_labels(y)
    train_idx, test_idx = stratified_indices(y, ratio, seed)
    est = fit_estimator(_seeded(estimator, seed, 0), _take(X, train_idx), y[train_idx], feature_names)
    return EvalReport.pooled([EvalReport.from_predictions(y[test_idx], est.predict(_take(X, test_idx)))])


# ---------------------------------------------------------------------------
# grid search

def dyadic_range(lo: int = -10, hi: int = 0) -> list[float]:
    return [2.0 ** e for e in range(lo, hi + 1)]


def grid_search(estimator, param_grid: Mapping[str, Sequence], X, y, ratio: float = 0.8,
                seed: int = 0) -> tuple[dict, float, list[tuple[dict, float]]]:
    """Pick the parameters with the best F-measure on an inner stratified split.

    Candidates are visited with every parameter ascending, in the order the
    grid's keys are given; only a strictly better score replaces the
    incumbent, so ties resolve to smaller values of the first key, then the
    next.  Infeasible combinations (fit raises ValueError) are skipped.
    """
    y = encode_labels(y)
    train_idx, val_idx = stratified_indices(y, ratio, seed)
    keys = list(param_grid)
    grids = [sorted(param_grid[k]) for k in keys]
    best_params, best_score, table = None, -1.0, []
    for combo in itertools.product(*grids):
        params = dict(zip(keys, combo))
        est = clone(estimator).set_params(**params)
        try:
            est.fit(_take(X, train_idx), y[train_idx])
        except ValueError:
            table.append((params, float("nan")))
            continue
        score = EvalReport.from_predictions(y[val_idx], est.predict(_take(X, val_idx))).f_measure
        table.append((params, score))
        if score > best_score:
            best_params, best_score = params, score
    if best_params is None:
        raise ValueError("no feasible parameter combination in the grid")
    return best_params, best_score, table


class GridSearchClassifier(ClassifierMixin, BaseEstimator):
    """Tunes ``estimator`` over ``param_grid`` on an inner 80/20 split, then refits on all data."""

    def __init__(self, estimator=None, param_grid=None, ratio: float = 0.8, random_state: int = 0):
        self.estimator = estimator
        self.param_grid = param_grid
        self.ratio = ratio
        self.random_state = random_state

    @property
    def kind(self):
        return self.estimator.kind

    def fit(self, X, y):
        best, score, table = grid_search(self.estimator, self.param_grid, X, y,
                                         self.ratio, self.random_state)
        self.best_params_ = best
        self.best_score_ = score
        self.grid_scores_ = table
        self.best_estimator_ = clone(self.estimator).set_params(**best).fit(X, y)
        self.classes_ = self.best_estimator_.classes_
        self.n_features_in_ = self.best_estimator_.n_features_in_
        return self

    def predict(self, X):
        return self.best_estimator_.predict(X)


# ---------------------------------------------------------------------------
# unbalanced training

@dataclass(frozen=True)
class SweepPoint:
    fixed_class: str
    fixed_count: int
    varying_count: int
    report: EvalReport

    @property
    def accuracy(self) -> float:
        return self.report.accuracy


def unbalanced_sweep(estimator, X, y, fixed_class: str, fixed_count: int,
                     varying_counts: Sequence[int], test_per_class: int = 50,
                     seed: int = 0) -> list[SweepPoint]:
    """Train on ``fixed_count`` of one class and each of ``varying_counts`` of
    the other; evaluate every model on one held-out balanced test set."""
    y = encode_labels(y)
    fixed = {"benign": 0, "malware": 1}[fixed_class]
    other = 1 - fixed
    if not varying_counts:
        return []
    rng = np.random.default_rng(seed)
    pools, test = {}, []
    for cls in (0, 1):
        idx = rng.permutation(np.nonzero(y == cls)[0])
        if len(idx) < test_per_class:
            raise ValueError(f"class {cls} has only {len(idx)} samples for a test set of {test_per_class}")
        test.append(idx[:test_per_class])
        pools[cls] = idx[test_per_class:]
    test_idx = np.sort(np.concatenate(test))
    need = max(varying_counts)
    if fixed_count > len(pools[fixed]) or need > len(pools[other]):
        raise ValueError(f"requested {fixed_count}/{need} training samples but only "
                         f"{len(pools[fixed])}/{len(pools[other])} remain after the test set")
    points = []
    for i, count in enumerate(varying_counts):
        sub = unit_rng(seed, i + 1)
        train_idx = np.sort(np.concatenate([sub.choice(pools[fixed], fixed_count, replace=False),
                                            sub.choice(pools[other], count, replace=False)]))
        est = _seeded(estimator, seed, i).fit(_take(X, train_idx), y[train_idx])
        rep = EvalReport.from_predictions(y[test_idx], est.predict(_take(X, test_idx)))
        points.append(SweepPoint(fixed_class, fixed_count, int(count), rep))
    return points
