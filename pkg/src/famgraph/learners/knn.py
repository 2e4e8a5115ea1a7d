from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .preprocessing import Standardizer, check_two_classes, encode_labels


class KNNClassifier(ClassifierMixin, BaseEstimator):
    """k-nearest neighbours, Euclidean distance, majority vote.

    Neighbours at equal distance are taken in training order.  A tied vote
    goes to the label of the single nearest neighbour.
    """

    kind = "knn"

    def __init__(self, k: int = 5, standardize: bool = True):
        self.k = k
        self.standardize = standardize

    def fit(self, X, y):
        X, y = check_X_y(X, y, dtype=float)
        y = encode_labels(y)
        check_two_classes(y)
        if self.k < 1 or self.k % 2 == 0:
            raise ValueError(f"k must be a positive odd integer, got {self.k}")
        if self.k > len(y):
            raise ValueError(f"k={self.k} exceeds the {len(y)} training samples")
        self.scaler_ = Standardizer().fit(X) if self.standardize else None
        self.X_ = self.scaler_.transform(X) if self.scaler_ is not None else X
        self.y_ = y
        self.classes_ = np.array([0, 1])
        self.n_features_in_ = X.shape[1]
        return self

    def kneighbors(self, X) -> np.ndarray:
        check_is_fitted(self, "X_")
        X = check_array(X, dtype=float)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} features, got {X.shape[1]}")
        if self.scaler_ is not None:
            X = self.scaler_.transform(X)
        d2 = ((X[:, None, :] - self.X_[None, :, :]) ** 2).sum(axis=2)
        return np.argsort(d2, axis=1, kind="stable")[:, : self.k]

    def predict(self, X):
        nbrs = self.kneighbors(X)
        labels = self.y_[nbrs]
        pos = labels.sum(axis=1)
        neg = self.k - pos
        out = (pos > neg).astype(int)
        tie = pos == neg
        out[tie] = labels[tie, 0]
        return out

    def get_state(self) -> dict:
        return {"X": self.X_.tolist(), "y": self.y_.tolist(),
                "scaler": self.scaler_.get_state() if self.scaler_ is not None else None}

    def set_state(self, state: dict) -> "KNNClassifier":
        self.X_ = np.array(state["X"], dtype=float)
        self.y_ = np.array(state["y"], dtype=int)
        self.scaler_ = Standardizer.from_state(state["scaler"]) if state["scaler"] else None
        self.n_features_in_ = self.X_.shape[1]
        self.classes_ = np.array([0, 1])
        return self
