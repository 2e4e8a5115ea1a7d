from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

LABEL_CODES = {"benign": 0, "malware": 1}


def encode_labels(y) -> np.ndarray:
    """Map labels to ints, malware = 1 (positive), benign = 0."""
    arr = np.asarray(y)
    if arr.dtype.kind in "USO":
        try:
            arr = np.array([LABEL_CODES[str(v)] for v in arr], dtype=int)
        except KeyError as exc:
            raise ValueError(f"unknown label {exc.args[0]!r}; expected benign/malware") from None
    arr = arr.astype(int, copy=False)
    if arr.ndim != 1:
        raise ValueError("labels must be one-dimensional")
    bad = set(np.unique(arr).tolist()) - {0, 1}
    if bad:
        raise ValueError(f"labels must be 0 (benign) or 1 (malware), got {sorted(bad)}")
    return arr


def check_two_classes(y: np.ndarray) -> None:
    if len(np.unique(y)) < 2:
        raise ValueError("training set contains a single class")


class Standardizer(TransformerMixin, BaseEstimator):
    """Per-feature z-scores with population standard deviation.

    Zero-variance columns pass through unscaled; ``constant_`` flags them.
    """

    def fit(self, X, y=None):
        X = check_array(X, dtype=float, ensure_min_samples=1)
        self.mean_ = X.mean(axis=0)
        sd = X.std(axis=0)
        self.constant_ = sd == 0
        self.mean_[self.constant_] = 0.0
        sd[self.constant_] = 1.0
        self.scale_ = sd
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "scale_")
        X = check_array(X, dtype=float)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} features, got {X.shape[1]}")
        return (X - self.mean_) / self.scale_

    def get_state(self) -> dict:
        return {"mean": self.mean_.tolist(), "scale": self.scale_.tolist(),
                "constant": self.constant_.tolist()}

    @classmethod
    def from_state(cls, state: dict) -> "Standardizer":
        obj = cls()
        obj.mean_ = np.array(state["mean"], dtype=float)
        obj.scale_ = np.array(state["scale"], dtype=float)
        obj.constant_ = np.array(state["constant"], dtype=bool)
        obj.n_features_in_ = len(obj.mean_)
        return obj


def standardize_fit_apply(train, test):
    """Fit on ``train`` only and apply to both; returns (train_z, test_z, scaler)."""
    train = np.asarray(train, dtype=float)
    if train.size == 0:
        raise ValueError("empty training matrix")
    scaler = Standardizer().fit(train)
    return scaler.transform(train), scaler.transform(test), scaler
