"""Slow reference solvers for checking :mod:`wikiease.ease` in tests.

Deliberately unlike the closed form: the constrained objective is minimised
by projected gradient descent on the full weight matrix.
"""

from __future__ import annotations

import numpy as np

from .featurize import FeatureMatrix


class ConvergenceError(RuntimeError):
    pass


def _features_by_entity(fm: FeatureMatrix) -> np.ndarray:
    # entities are columns
    return np.asarray(fm.values.toarray(), dtype=np.float64).T


def oracle_objective(fm: FeatureMatrix, b: np.ndarray, lam: float) -> float:
    """||X - X B||_F^2 + lam ||B||_F^2 with X = features x entities."""
    b = np.asarray(b, dtype=np.float64)
    if np.any(np.diag(b) != 0):
        raise ValueError("B must have an exactly zero diagonal")
    x = _features_by_entity(fm)
    resid = x - x @ b
    return float(np.sum(resid * resid) + lam * np.sum(b * b))


def oracle_fit(
    fm: FeatureMatrix,
    lam: float,
    tolerance: float = 1e-10,
    max_iter: int = 2_000_000,
) -> np.ndarray:
    """Projected gradient descent on the zero-diagonal ridge objective.

    Step size ``1 / (2 (trace(X^T X) + lam))``; the trace bounds the largest
    eigenvalue of ``X^T X``.  Stops once the projected gradient norm drops
    below ``tolerance``.
    """
    if lam <= 0:
        raise ValueError("lambda must be positive")
    n, m = fm.n_entities, fm.n_features
    if n > 12 or m > 12:
        raise ValueError("oracle_fit is meant for N, M <= 12")
    x = _features_by_entity(fm)
    k = x.T @ x
    step = 1.0 / (2.0 * (np.trace(k) + lam))
    b = np.zeros((n, n))
    offdiag = ~np.eye(n, dtype=bool)
    gnorm = np.inf
    for _ in range(max_iter):
        grad = 2.0 * (k @ b - k + lam * b)
        grad[~offdiag] = 0.0
        gnorm = np.linalg.norm(grad)
        if gnorm < tolerance:
            return b
        b -= step * grad
        np.fill_diagonal(b, 0.0)
    raise ConvergenceError(f"no convergence after {max_iter} iterations (gradient norm {gnorm:.3e})")
