"""Laplacian spectrum via cyclic Jacobi rotations."""

from __future__ import annotations

import math

import numpy as np

from ..callgraph import UndirectedView
from .structure import connected_components

JACOBI_TOL = 1e-9
#: algebraic connectivity is reported rounded to this many decimals so the
#: feature is bit-stable under node relabelling (well below solver accuracy).
LAMBDA2_DECIMALS = 10


def laplacian_matrix(view: UndirectedView) -> np.ndarray:
    """Unweighted Laplacian D - A in ``view.nodes`` order."""
    index = {v: i for i, v in enumerate(view.nodes)}
    n = len(index)
    lap = np.zeros((n, n))
    for (u, v) in view.weights:
        i, j = index[u], index[v]
        lap[i, j] = lap[j, i] = -1.0
    lap[np.diag_indices(n)] = -lap.sum(axis=1)
    return lap


def _off_norm(a: np.ndarray) -> float:
    off = a - np.diag(np.diag(a))
    return math.sqrt(float((off * off).sum()))


def jacobi_eigenvalues(matrix, tol: float = JACOBI_TOL, max_sweeps: int = 100) -> np.ndarray:
    """Eigenvalues of a real symmetric matrix, ascending.

    Sweeps over all (p, q) pairs annihilating a[p, q] until the off-diagonal
    Frobenius norm drops below ``tol``.
    """
    a = np.array(matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("matrix must be square")
    if not np.allclose(a, a.T, atol=0, rtol=0):
        raise ValueError("matrix must be symmetric")
    n = a.shape[0]
    for _ in range(max_sweeps):
        if _off_norm(a) < tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) < 1e-300:
                    a[p, q] = a[q, p] = 0.0
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                a[p, q] = a[q, p] = 0.0
    else:
        raise RuntimeError(f"Jacobi iteration did not converge in {max_sweeps} sweeps")
    return np.sort(np.diag(a))


def algebraic_connectivity(view: UndirectedView) -> float:
    """Second-smallest Laplacian eigenvalue; 0 for singleton or disconnected views."""
    if view.n_nodes < 2 or len(connected_components(view)) > 1:
        return 0.0
    lam = round(float(jacobi_eigenvalues(laplacian_matrix(view))[1]), LAMBDA2_DECIMALS)
    return lam if lam > 0 else 0.0
