"""All-pairs lasso with a strong hierarchy constraint, by ADMM.

For response ``y`` and predictors ``X`` (``m`` columns) the fit minimizes::

    (1/(2n)) sum_i (y_i - x_i'b - 1/2 x_i' Theta x_i)^2
        + lambda_main * sum_j (b+_j + b-_j) + (lam/2) * ||Theta||_1

over ``b = b+ - b-`` with ``b+, b- >= 0`` and symmetric ``Theta`` with zero
diagonal, subject to ``||Theta_j||_1 <= b+_j + b-_j`` for every ``j``.
"""

from __future__ import annotations

import numpy as np

from ..expression import ExpressionMatrix, response_view
from . import _kernels
from .base import InteractionFit, SolverOptions


class BudgetExceeded(ValueError):
    """The number of interaction features exceeds the configured budget."""


def count_pairwise_interactions(p: int) -> int:
    if p < 0:
        raise ValueError("p must be nonnegative")
    return p * (p - 1) // 2


def _pairs(m: int):
    i, j = np.triu_indices(m, 1)
    return i.astype(np.int64), j.astype(np.int64)


def interaction_features(X: np.ndarray) -> np.ndarray:
    """Columns ``x_i * x_j`` for ``i < j`` in row-major pair order."""
    i, j = _pairs(X.shape[1])
    return X[:, i] * X[:, j]


def hierarchical_lambda_max(X, y) -> float:
    """A penalty (with ``lambda_main == lam``) at which the zero fit is optimal."""
    n = X.shape[0]
    Z = interaction_features(X)
    scores = np.concatenate([np.abs(X.T @ y), np.abs(Z.T @ y)]) / n
    return float(scores.max(initial=0.0))


def hierarchical_objective(X, y, main_plus, main_minus, theta, lam, lambda_main) -> float:
    n = X.shape[0]
    fitted = X @ (main_plus - main_minus) + 0.5 * np.einsum("ij,jk,ik->i", X, theta, X)
    r = y - fitted
    return float(
        r @ r / (2 * n)
        + lambda_main * (main_plus + main_minus).sum()
        + 0.5 * lam * np.abs(theta).sum()
    )


class HierSystem:
    """Data-dependent ADMM constants for one design; independent of the penalties."""

    def __init__(self, X, y, rho: float, budget: int):
        X = np.asarray(X, dtype=float)
        n, m = X.shape
        q = count_pairwise_interactions(m)
        if q > budget:
            raise BudgetExceeded(f"{q} interaction features exceed the budget of {budget}")
        self.X = X
        self.y = np.ascontiguousarray(y, dtype=float)
        self.rho = rho
        self.pairs_i, self.pairs_j = _pairs(m)
        self.W = np.ascontiguousarray(np.hstack([X, interaction_features(X)]))
        d0inv = np.concatenate([np.full(m, 2.0), np.full(q, 0.5)])
        evals, Q = np.linalg.eigh((self.W * d0inv) @ self.W.T)
        self.evals = np.ascontiguousarray(np.clip(evals, 0.0, None))
        self.WQ = np.ascontiguousarray(self.W.T @ Q)


def _fit_hierarchical(X, y, lam, lambda_main, opts: SolverOptions, warm=None, system=None):
    """Returns ``(InteractionFit, state)``; ``state`` warm-starts the next call."""
    m = X.shape[1]
    system = system or HierSystem(X, y, opts.rho, opts.interaction_budget)
    if warm is None:
        state = [np.zeros(m), np.zeros(m), np.zeros((m, m)), np.zeros(m), np.zeros(m), np.zeros((m, m))]
        rho = system.rho
    else:
        state = [np.array(a, dtype=float) for a in warm[:6]]
        rho = warm[6]
    bp, bm, T, up, um, U = state
    iters, ok, primal, rho = _kernels.admm_hierarchical(
        system.W, system.y, system.WQ, system.evals, rho, float(lambda_main), 0.5 * float(lam),
        system.pairs_i, system.pairs_j, bp, bm, T, up, um, U, opts.tol, opts.max_iter,
    )
    theta = 0.5 * (T + T.T)
    np.fill_diagonal(theta, 0.0)
    main_plus, main_minus = bp.copy(), bm.copy()
    # symmetrizing can push a row over its budget by O(primal residual);
    # raising b+ and b- equally restores feasibility without moving b.
    deficit = np.abs(theta).sum(axis=1) - (main_plus + main_minus)
    fix = np.where(deficit > 0, deficit / 2, 0.0)
    main_plus += fix
    main_minus += fix
    fit = InteractionFit(
        main_plus=main_plus,
        main_minus=main_minus,
        interactions=theta,
        objective_value=hierarchical_objective(X, y, main_plus, main_minus, theta, lam, lambda_main),
        iterations=int(iters),
        converged=bool(ok) and primal < opts.kkt_tol,
        max_kkt_violation=float(primal),
    )
    return fit, [bp, bm, T, up, um, U, rho]


def solve_hierarchical(
    m: ExpressionMatrix,
    response_index: int,
    lam: float,
    opts: SolverOptions = SolverOptions(),
    lambda_main: float | None = None,
) -> InteractionFit:
    """Hierarchical interaction fit of gene ``response_index`` on all other genes.

    ``lambda_main`` defaults to ``lam``.
    """
    if lam < 0 or (lambda_main is not None and lambda_main < 0):
        raise ValueError("penalties must be nonnegative")
    v = response_view(m, response_index)
    fit, _ = _fit_hierarchical(v.X_minus, v.y, lam, lam if lambda_main is None else lambda_main, opts)
    return fit
