"""Fused lasso over a fixed predictor ordering, by ADMM."""

from __future__ import annotations

import numpy as np

from ..expression import ResponseView
from . import _kernels
from .base import FitResult, SolverOptions, possibly_nonunique


def _check_order(order, m: int) -> np.ndarray:
    order = np.asarray(order, dtype=np.int64)
    if order.shape != (m,) or not np.array_equal(np.sort(order), np.arange(m)):
        raise ValueError(f"order must be a permutation of the {m} predictors")
    return order


def fused_objective(X, y, theta, l1, l2, order) -> float:
    n = X.shape[0]
    r = y - X @ theta
    tv = np.abs(np.diff(theta[np.asarray(order)])).sum()
    return float(r @ r / (2 * n) + l1 * np.abs(theta).sum() + l2 * tv)


def fused_kkt(X, y, theta, l1, l2, order) -> float:
    """Proximal-gradient fixed-point residual."""
    n = X.shape[0]
    grad = X.T @ (y - X @ theta) / n
    order = np.asarray(order, dtype=np.int64)
    step = _kernels.fused_prox(theta + grad, order, float(l1), float(l2))
    return float(np.max(np.abs(theta - step), initial=0.0))


class FusedSystem:
    """Factorized ADMM linear system for one design matrix; reusable across penalties."""

    def __init__(self, X, y, rho: float):
        X = np.asarray(X, dtype=float)
        n, m = X.shape
        self.X = X
        self.y = np.asarray(y, dtype=float)
        self.rho = rho
        A = X.T @ X / n + rho * np.eye(m)
        c = np.linalg.cholesky(A)
        inv_c = np.linalg.solve(c, np.eye(m))
        self.solve_mat = np.ascontiguousarray(inv_c.T @ inv_c)
        self.Xty = X.T @ self.y / n


def _fit_fused(X, y, l1, l2, order, opts: SolverOptions, warm=None, system=None):
    """Returns ``(FitResult, state)``; ``state`` warm-starts the next call."""
    m = X.shape[1]
    order = _check_order(order, m)
    system = system or FusedSystem(X, y, opts.rho)
    if warm is None:
        z = np.zeros(m)
        u = np.zeros(m)
    else:
        z, u = (np.array(a, dtype=float) for a in warm)
    if l1 >= np.abs(system.Xty).max(initial=0.0):
        # the L1 part alone already makes zero optimal
        z, u, iters, ok = np.zeros(m), np.zeros(m), 0, True
    else:
        theta = z.copy()
        iters, ok = _kernels.admm_fused(
            system.solve_mat, system.Xty, order, float(l1), float(l2), system.rho,
            theta, z, u, opts.tol, opts.max_iter,
        )
    kkt = fused_kkt(X, y, z, l1, l2, order)
    fit = FitResult(
        coefficients=z,
        objective_value=fused_objective(X, y, z, l1, l2, order),
        iterations=int(iters),
        converged=bool(ok) and kkt < opts.kkt_tol,
        max_kkt_violation=kkt,
        possibly_nonunique=possibly_nonunique(X),
    )
    return fit, (z.copy(), u.copy())


def solve_fused(
    v: ResponseView,
    lambda1: float,
    lambda2: float,
    order=None,
    opts: SolverOptions = SolverOptions(),
) -> FitResult:
    """Minimize ``(1/(2n))||y - X theta||^2 + lambda1 |theta|_1 + lambda2 sum_k |theta_(k) - theta_(k-1)|``.

    Differences run along ``order`` (a permutation of predictor positions,
    identity when omitted). Coefficients come back in the original predictor
    order.
    """
    if lambda1 < 0 or lambda2 < 0:
        raise ValueError("penalties must be nonnegative")
    m = v.X_minus.shape[1]
    if order is None:
        order = np.arange(m)
    fit, _ = _fit_fused(v.X_minus, v.y, lambda1, lambda2, order, opts)
    return fit
