"""Random forest of CART trees (Gini impurity, bootstrap resampling)."""

from __future__ import annotations

import math

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .preprocessing import check_two_classes, encode_labels

LEAF = -1


def unit_rng(seed: int, unit: int) -> np.random.Generator:
    """Independent stream for one parallelisable unit (tree, fold, ...)."""
    return np.random.default_rng([int(seed), int(unit)])


def _best_split(x: np.ndarray, y: np.ndarray):
    """Lowest weighted Gini split of one feature, or None if the feature is constant.

    Returns (impurity_sum, threshold).
    """
    order = np.argsort(x, kind="stable")
    xs = x[order]
    ys = y[order]
    valid = np.nonzero(xs[:-1] < xs[1:])[0]
    if valid.size == 0:
        return None
    n = len(ys)
    pos_left = np.cumsum(ys)[valid]
    n_left = valid + 1
    n_right = n - n_left
    pos_right = ys.sum() - pos_left
    # n * gini = n - (pos^2 + neg^2) / n
    g_left = n_left - (pos_left ** 2 + (n_left - pos_left) ** 2) / n_left
    g_right = n_right - (pos_right ** 2 + (n_right - pos_right) ** 2) / n_right
    total = g_left + g_right
    k = int(np.argmin(total))
    i = valid[k]
    thr = (xs[i] + xs[i + 1]) / 2.0
    if not xs[i] <= thr < xs[i + 1]:
        thr = xs[i]
    return float(total[k]), float(thr)


class DecisionTree:
    """Fully grown CART classification tree stored as flat arrays."""

    def __init__(self, max_features: int | None = None, min_samples_leaf: int = 1):
        self.max_features = max_features
        self.min_samples_leaf = min_samples_leaf

    def fit(self, X: np.ndarray, y: np.ndarray, rng: np.random.Generator) -> "DecisionTree":
        n, d = X.shape
        m = d if self.max_features is None else max(1, min(d, self.max_features))
        feature, threshold, left, right, counts = [], [], [], [], []

        def new_node(idx):
            feature.append(LEAF)
            threshold.append(0.0)
            left.append(LEAF)
            right.append(LEAF)
            pos = int(y[idx].sum())
            counts.append((len(idx) - pos, pos))
            return len(feature) - 1

        root = new_node(np.arange(n))
        stack = [(root, np.arange(n))]
        while stack:
            node, idx = stack.pop()
            neg, pos = counts[node]
            if neg == 0 or pos == 0 or len(idx) < 2 * self.min_samples_leaf:
                continue
            best = None
            tried = 0
            for f in rng.permutation(d):
                if tried >= m and best is not None:
                    break
                res = _best_split(X[idx, f], y[idx])
                tried += 1
                if res is None:
                    continue
                if best is None or res[0] < best[0]:
                    best = (res[0], int(f), res[1])
            if best is None:
                continue
            _, f, thr = best
            go_left = X[idx, f] <= thr
            li, ri = idx[go_left], idx[~go_left]
            if len(li) < self.min_samples_leaf or len(ri) < self.min_samples_leaf:
                continue
            feature[node] = f
            threshold[node] = thr
            left[node] = new_node(li)
            right[node] = new_node(ri)
            stack.append((right[node], ri))
            stack.append((left[node], li))

        self.feature_ = np.array(feature, dtype=int)
        self.threshold_ = np.array(threshold, dtype=float)
        self.left_ = np.array(left, dtype=int)
        self.right_ = np.array(right, dtype=int)
        self.counts_ = np.array(counts, dtype=int).reshape(-1, 2)
        return self

    def apply(self, X: np.ndarray) -> np.ndarray:
        node = np.zeros(X.shape[0], dtype=int)
        active = self.feature_[node] != LEAF
        while active.any():
            rows = np.nonzero(active)[0]
            cur = node[rows]
            go_left = X[rows, self.feature_[cur]] <= self.threshold_[cur]
            node[rows] = np.where(go_left, self.left_[cur], self.right_[cur])
            active = self.feature_[node] != LEAF
        return node

    def predict(self, X: np.ndarray) -> np.ndarray:
        c = self.counts_[self.apply(X)]
        # ties go to benign
        return (c[:, 1] > c[:, 0]).astype(int)

    def get_state(self) -> dict:
        return {"feature": self.feature_.tolist(), "threshold": self.threshold_.tolist(),
                "left": self.left_.tolist(), "right": self.right_.tolist(),
                "counts": self.counts_.tolist()}

    @classmethod
    def from_state(cls, state: dict) -> "DecisionTree":
        t = cls()
        t.feature_ = np.array(state["feature"], dtype=int)
        t.threshold_ = np.array(state["threshold"], dtype=float)
        t.left_ = np.array(state["left"], dtype=int)
        t.right_ = np.array(state["right"], dtype=int)
        t.counts_ = np.array(state["counts"], dtype=int).reshape(-1, 2)
        return t


class RandomForestClassifier(ClassifierMixin, BaseEstimator):
    """Bagged CART trees with sqrt(d) candidate features per split.

    Majority vote; a tied vote predicts benign.  Tree ``i`` draws from its
    own stream seeded by ``(random_state, i)``, so results do not depend on
    training order.  When ``feature_names`` is passed to ``fit`` the columns
    are visited in name order, making the model independent of column order.
    """

    kind = "random_forest"

    def __init__(self, n_estimators: int = 100, max_features="sqrt",
                 min_samples_leaf: int = 1, random_state: int = 0):
        self.n_estimators = n_estimators
        self.max_features = max_features
        self.min_samples_leaf = min_samples_leaf
        self.random_state = random_state

    def _n_candidates(self, d: int) -> int:
        mf = self.max_features
        if mf == "sqrt":
            return max(1, int(math.sqrt(d)))
        if mf is None:
            return d
        if isinstance(mf, float):
            return max(1, int(mf * d))
        return int(mf)

    def fit(self, X, y, feature_names=None):
        X, y = check_X_y(X, y, dtype=float)
        y = encode_labels(y)
        check_two_classes(y)
        if self.n_estimators < 1:
            raise ValueError("n_estimators must be >= 1")
        n, d = X.shape
        if feature_names is not None:
            if len(feature_names) != d:
                raise ValueError("feature_names length does not match X")
            self.feature_names_in_ = np.array(feature_names, dtype=object)
            self.column_order_ = np.argsort(self.feature_names_in_.astype(str), kind="stable")
        else:
            self.column_order_ = np.arange(d)
        X = X[:, self.column_order_]
        m = self._n_candidates(d)
        self.estimators_ = []
        for i in range(self.n_estimators):
            rng = unit_rng(self.random_state, i)
            boot = rng.integers(0, n, n)
            tree = DecisionTree(m, self.min_samples_leaf).fit(X[boot], y[boot], rng)
            self.estimators_.append(tree)
        self.classes_ = np.array([0, 1])
        self.n_features_in_ = d
        return self

    def _votes(self, X) -> np.ndarray:
        check_is_fitted(self, "estimators_")
        X = check_array(X, dtype=float)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} features, got {X.shape[1]}")
        X = X[:, self.column_order_]
        return np.sum([t.predict(X) for t in self.estimators_], axis=0)

    def predict(self, X):
        return (2 * self._votes(X) > len(self.estimators_)).astype(int)

    def predict_proba(self, X):
        p = self._votes(X) / len(self.estimators_)
        return np.column_stack([1 - p, p])

    def get_state(self) -> dict:
        return {"n_features_in": self.n_features_in_,
                "column_order": self.column_order_.tolist(),
                "trees": [t.get_state() for t in self.estimators_]}

    def set_state(self, state: dict) -> "RandomForestClassifier":
        self.estimators_ = [DecisionTree.from_state(s) for s in state["trees"]]
        self.n_features_in_ = state["n_features_in"]
        self.column_order_ = np.array(state["column_order"], dtype=int)
        self.classes_ = np.array([0, 1])
        return self
