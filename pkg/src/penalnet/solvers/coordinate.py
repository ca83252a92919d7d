"""Lasso, ridge and elastic net by cyclic coordinate descent."""

from __future__ import annotations

import numpy as np

from ..expression import ResponseView
from . import _kernels
from .base import FitResult, SolverOptions, possibly_nonunique


def lambda_max(v: ResponseView) -> float:
    """Smallest lasso penalty whose solution is identically zero."""
    return _lambda_max(v.X_minus, v.y)


def _lambda_max(X, y) -> float:
    n = X.shape[0]
    if X.shape[1] == 0:
        return 0.0
    return float(np.max(np.abs(X.T @ y)) / n)


def elastic_net_objective(X, y, theta, l1, l2) -> float:
    n = X.shape[0]
    r = y - X @ theta
    return float(r @ r / (2 * n) + l1 * np.abs(theta).sum() + 0.5 * l2 * theta @ theta)


def elastic_net_kkt(X, y, theta, l1, l2) -> float:
    """Largest violation of the elastic-net stationarity conditions.

    With ``g_j = x_j'(y - X theta)/n - l2 theta_j``: ``|g_j| <= l1`` where
    ``theta_j = 0`` and ``g_j = l1 sign(theta_j)`` elsewhere.
    """
    n = X.shape[0]
    g = X.T @ (y - X @ theta) / n - l2 * theta
    nz = theta != 0
    viol = np.zeros_like(theta)
    viol[~nz] = np.maximum(np.abs(g[~nz]) - l1, 0.0)
    viol[nz] = np.abs(g[nz] - l1 * np.sign(theta[nz]))
    return float(viol.max(initial=0.0))


def _fit_elastic_net(X, y, l1, l2, opts: SolverOptions, warm=None) -> FitResult:
    X = np.ascontiguousarray(X, dtype=float)
    y = np.ascontiguousarray(y, dtype=float)
    if l1 >= _lambda_max(X, y):
        # zero satisfies the optimality conditions exactly; skip the sweeps so
        # rounding in the residual updates cannot leave 1-ulp coefficients
        beta, iters, ok = np.zeros(X.shape[1]), 0, True
    else:
        beta = np.zeros(X.shape[1]) if warm is None else np.array(warm, dtype=float)
        iters, ok = _kernels.cd_elastic_net(
            np.ascontiguousarray(X.T), y, float(l1), float(l2), beta, opts.tol, opts.max_iter
        )
    kkt = elastic_net_kkt(X, y, beta, l1, l2)
    return FitResult(
        coefficients=beta,
        objective_value=elastic_net_objective(X, y, beta, l1, l2),
        iterations=int(iters),
        converged=bool(ok) and kkt < opts.kkt_tol,
        max_kkt_violation=kkt,
        possibly_nonunique=possibly_nonunique(X),
    )


def solve_lasso(v: ResponseView, lam: float, opts: SolverOptions = SolverOptions()) -> FitResult:
    """Minimize ``(1/(2n))||y - X theta||^2 + lam ||theta||_1``."""
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    return _fit_elastic_net(v.X_minus, v.y, lam, 0.0, opts)


def solve_ridge(v: ResponseView, lam: float, opts: SolverOptions = SolverOptions()) -> FitResult:
    """Minimize ``(1/(2n))||y - X theta||^2 + (lam/2) ||theta||_2^2``."""
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    return _fit_elastic_net(v.X_minus, v.y, 0.0, lam, opts)


def solve_elastic_net(
    v: ResponseView, lambda1: float, lambda2: float, opts: SolverOptions = SolverOptions()
) -> FitResult:
    """Minimize ``(1/(2n))||y - X theta||^2 + lambda1 ||theta||_1 + (lambda2/2) ||theta||_2^2``."""
    if lambda1 < 0 or lambda2 < 0:
        raise ValueError("penalties must be nonnegative")
    return _fit_elastic_net(v.X_minus, v.y, lambda1, lambda2, opts)


def ridge_closed_form(v: ResponseView, lambda_cf: float) -> np.ndarray:
    """``(X'X + lambda_cf I)^-1 X'y``.

    ``lambda_cf = n * lam`` reproduces :func:`solve_ridge` at penalty ``lam``.
    Raises ``numpy.linalg.LinAlgError`` for a singular system.
    """
    X, y = v.X_minus, v.y
    A = X.T @ X + lambda_cf * np.eye(X.shape[1])
    if lambda_cf == 0 and np.linalg.matrix_rank(A) < A.shape[0]:
        raise np.linalg.LinAlgError("X'X is singular and lambda_cf is zero")
    return np.linalg.solve(A, X.T @ y)
