"""Two-class nu-SVM with an RBF kernel, solved by pairwise (SMO) coordinate descent.

Dual problem, with Q_ij = y_i y_j K(x_i, x_j) and labels in {-1, +1}::

    min_a  1/2 a'Qa
    s.t.   0 <= a_i <= 1,  y'a = 0,  e'a = nu * l

Both equality constraints hold iff each class carries ``nu * l / 2`` of the
total, so every update moves mass between two points of the same class.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .preprocessing import Standardizer, check_two_classes, encode_labels

TAU = 1e-12


def rbf_kernel(A: np.ndarray, B: np.ndarray, gamma: float) -> np.ndarray:
    sq = (A * A).sum(1)[:, None] + (B * B).sum(1)[None, :] - 2.0 * A @ B.T
    return np.exp(-gamma * np.maximum(sq, 0.0))


def nu_feasible(nu: float, n_pos: int, n_neg: int) -> bool:
    return 0.0 < nu <= 2.0 * min(n_pos, n_neg) / (n_pos + n_neg) + 1e-12


def solve_nu_svc(K: np.ndarray, y: np.ndarray, nu: float, tol: float = 1e-3,
                 max_iter: int = 1_000_000):
    """Return (alpha, rho, r, iterations) for labels ``y`` in {-1, +1}.

    Stops when the largest same-class KKT violation drops below ``tol``.
    """
    n = len(y)
    Q = K * np.outer(y, y)
    alpha = np.zeros(n)
    for cls in (1, -1):
        remaining = nu * n / 2.0
        for i in np.nonzero(y == cls)[0]:
            alpha[i] = min(1.0, remaining)
            remaining -= alpha[i]
    G = Q @ alpha
    diag = np.diag(Q).copy()
    masks = [y == 1, y == -1]

    it = 0
    while it < max_iter:
        best = None
        for mask in masks:
            can_up = mask & (alpha < 1.0)
            can_down = mask & (alpha > 0.0)
            if not can_up.any() or not can_down.any():
                continue
            g_up = np.where(can_up, G, np.inf)
            g_down = np.where(can_down, G, -np.inf)
            i = int(np.argmin(g_up))
            j = int(np.argmax(g_down))
            gap = G[j] - G[i]
            if best is None or gap > best[0]:
                best = (gap, i, j)
        if best is None or best[0] < tol:
            break
        gap, i, j = best
        eta = diag[i] + diag[j] - 2.0 * Q[i, j]
        t = gap / max(eta, TAU)
        t = min(t, 1.0 - alpha[i], alpha[j])
        alpha[i] += t
        alpha[j] -= t
        G += t * (Q[:, i] - Q[:, j])
        it += 1

    r_cls = []
    for mask in masks:
        free = mask & (alpha > 0.0) & (alpha < 1.0)
        if free.any():
            r_cls.append(float(G[free].mean()))
        else:
            at_upper = mask & (alpha >= 1.0)
            at_lower = mask & (alpha <= 0.0)
            lb = G[at_upper].max() if at_upper.any() else -np.inf
            ub = G[at_lower].min() if at_lower.any() else np.inf
            r_cls.append(float((lb + ub) / 2.0) if np.isfinite(lb + ub) else float(
                lb if np.isfinite(lb) else ub))
    r = (r_cls[0] + r_cls[1]) / 2.0
    rho = (r_cls[0] - r_cls[1]) / 2.0
    return alpha, rho, r, it


class NuSVMClassifier(ClassifierMixin, BaseEstimator):
    """nu-SVC with RBF kernel exp(-gamma * ||x - y||^2).

    Positive decision values mean malware; zero is benign.
    """

    kind = "nu_svm"

    def __init__(self, gamma: float = 2.0 ** -5, nu: float = 0.5, tol: float = 1e-3,
                 standardize: bool = True, max_iter: int = 1_000_000):
        self.gamma = gamma
        self.nu = nu
        self.tol = tol
        self.standardize = standardize
        self.max_iter = max_iter

    def fit(self, X, y):
        X, y = check_X_y(X, y, dtype=float)
        y = encode_labels(y)
        check_two_classes(y)
        if not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        n_pos = int(y.sum())
        n_neg = len(y) - n_pos
        if not nu_feasible(self.nu, n_pos, n_neg):
            raise ValueError(f"nu={self.nu} infeasible for {n_pos} malware / {n_neg} benign "
                             f"samples (need 0 < nu <= {2 * min(n_pos, n_neg) / len(y):.4g})")
        self.scaler_ = Standardizer().fit(X) if self.standardize else None
        Xs = self.scaler_.transform(X) if self.scaler_ is not None else X
        ys = np.where(y == 1, 1.0, -1.0)
        alpha, rho, r, it = solve_nu_svc(rbf_kernel(Xs, Xs, self.gamma), ys, self.nu,
                                         self.tol, self.max_iter)
        sv = alpha > 0
        self.support_vectors_ = Xs[sv]
        self.dual_coef_ = (alpha * ys)[sv]
        self.rho_ = rho
        self.r_ = r
        self.n_iter_ = it
        self.classes_ = np.array([0, 1])
        self.n_features_in_ = X.shape[1]
        return self

    def decision_function(self, X) -> np.ndarray:
        check_is_fitted(self, "dual_coef_")
        X = check_array(X, dtype=float)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} features, got {X.shape[1]}")
        if self.scaler_ is not None:
            X = self.scaler_.transform(X)
        return rbf_kernel(X, self.support_vectors_, self.gamma) @ self.dual_coef_ - self.rho_

    def predict(self, X):
        return (self.decision_function(X) > 0).astype(int)

    def get_state(self) -> dict:
        return {"support_vectors": self.support_vectors_.tolist(),
                "dual_coef": self.dual_coef_.tolist(), "rho": self.rho_, "r": self.r_,
                "n_features_in": self.n_features_in_,
                "scaler": self.scaler_.get_state() if self.scaler_ is not None else None}

    def set_state(self, state: dict) -> "NuSVMClassifier":
        self.n_features_in_ = state["n_features_in"]
        self.support_vectors_ = np.array(state["support_vectors"], dtype=float).reshape(
            -1, self.n_features_in_)
        self.dual_coef_ = np.array(state["dual_coef"], dtype=float)
        self.rho_ = state["rho"]
        self.r_ = state["r"]
        self.scaler_ = Standardizer.from_state(state["scaler"]) if state["scaler"] else None
        self.classes_ = np.array([0, 1])
        return self
