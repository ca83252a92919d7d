"""Group, sparse-group and paired-group lasso by block coordinate descent."""

from __future__ import annotations

import numpy as np

from ..expression import ExpressionMatrix, ResponseView
from ..grouping import GroupAssignment
from . import _kernels
from .base import FitResult, PairedFit, SolverOptions, possibly_nonunique


class _Blocks:
    """Column permutation and per-group constants for a group assignment."""

    def __init__(self, X: np.ndarray, groups: GroupAssignment):
        m = X.shape[1]
        if len(groups.labels) != m:
            raise ValueError(f"group assignment covers {len(groups.labels)} predictors, expected {m}")
        labels = np.asarray(groups.labels)
        self.perm = np.argsort(labels, kind="stable")
        self.sizes = np.bincount(labels, minlength=groups.k)
        self.starts = np.concatenate([[0], np.cumsum(self.sizes)]).astype(np.int64)
        self.weights = np.sqrt(self.sizes.astype(float))
        self.X = np.ascontiguousarray(X[:, self.perm], dtype=float)
        self.XT = np.ascontiguousarray(self.X.T)
        n = X.shape[0]
        L = np.empty(groups.k)
        for g in range(groups.k):
            Xg = self.X[:, self.starts[g]:self.starts[g + 1]]
            if Xg.shape[1] == 1:
                L[g] = float(Xg[:, 0] @ Xg[:, 0] / n)
            else:
                L[g] = float(np.linalg.eigvalsh(Xg.T @ Xg / n)[-1])
        L[L < 1e-14] = 0.0
        self.lipschitz = L

    def to_blocks(self, theta):
        return np.asarray(theta, dtype=float)[self.perm].copy()

    def from_blocks(self, beta):
        out = np.empty_like(beta)
        out[self.perm] = beta
        return out


def group_lambda_max(X, y, groups: GroupAssignment) -> float:
    """Smallest group-lasso penalty whose solution is identically zero."""
    n = X.shape[0]
    g = X.T @ y / n
    labels = np.asarray(groups.labels)
    return float(max(
        np.linalg.norm(g[labels == k]) / np.sqrt(np.sum(labels == k)) for k in range(groups.k)
    ))


def sparse_group_objective(X, y, theta, groups: GroupAssignment, l_group, l1) -> float:
    n = X.shape[0]
    r = y - X @ theta
    labels = np.asarray(groups.labels)
    pen = sum(
        np.sqrt(np.sum(labels == k)) * np.linalg.norm(theta[labels == k]) for k in range(groups.k)
    )
    return float(r @ r / (2 * n) + l_group * pen + l1 * np.abs(theta).sum())


def _sparse_group_prox(v, groups: GroupAssignment, l_group, l1):
    labels = np.asarray(groups.labels)
    w = np.sign(v) * np.maximum(np.abs(v) - l1, 0.0)
    for k in range(groups.k):
        idx = labels == k
        nv = np.linalg.norm(w[idx])
        thr = l_group * np.sqrt(idx.sum())
        w[idx] = 0.0 if nv <= thr else (1 - thr / nv) * w[idx]
    return w


def sparse_group_kkt(X, y, theta, groups, l_group, l1) -> float:
    """Proximal-gradient fixed-point residual (zero exactly at optimality)."""
    n = X.shape[0]
    grad = X.T @ (y - X @ theta) / n
    return float(np.max(np.abs(theta - _sparse_group_prox(theta + grad, groups, l_group, l1)), initial=0.0))


def _zero_is_optimal(X, y, groups, l_group, l1) -> bool:
    """Exact optimality test of the zero vector: ``||S(g_l, l1)|| <= l_group sqrt(n_l)`` for every group."""
    g = X.T @ y / X.shape[0]
    shrunk = np.sign(g) * np.maximum(np.abs(g) - l1, 0.0)
    labels = np.asarray(groups.labels)
    return all(
        np.linalg.norm(shrunk[labels == k]) <= l_group * np.sqrt(np.sum(labels == k)) for k in range(groups.k)
    )


def _fit_sparse_group(X, y, groups, l_group, l1, opts: SolverOptions, warm=None, blocks=None) -> FitResult:
    blocks = blocks or _Blocks(X, groups)
    y = np.ascontiguousarray(y, dtype=float)
    if _zero_is_optimal(X, y, groups, l_group, l1):
        theta, iters, ok = np.zeros(X.shape[1]), 0, True
    else:
        beta = np.zeros(X.shape[1]) if warm is None else blocks.to_blocks(warm)
        iters, ok = _kernels.bcd_sparse_group(
            blocks.XT, y, blocks.starts, blocks.weights, blocks.lipschitz,
            float(l_group), float(l1), beta, opts.tol, opts.max_iter,
        )
        theta = blocks.from_blocks(beta)
    kkt = sparse_group_kkt(X, y, theta, groups, l_group, l1)
    return FitResult(
        coefficients=theta,
        objective_value=sparse_group_objective(X, y, theta, groups, l_group, l1),
        iterations=int(iters),
        converged=bool(ok) and kkt < opts.kkt_tol,
        max_kkt_violation=kkt,
        possibly_nonunique=possibly_nonunique(X),
    )


def solve_group(
    v: ResponseView, lam: float, groups: GroupAssignment, opts: SolverOptions = SolverOptions()
) -> FitResult:
    """Minimize ``(1/(2n))||y - X theta||^2 + lam sum_l sqrt(n_l) ||theta_l||_2``."""
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    return _fit_sparse_group(v.X_minus, v.y, groups, lam, 0.0, opts)


def solve_sparse_group(
    v: ResponseView,
    lambda1: float,
    lambda2: float,
    groups: GroupAssignment,
    opts: SolverOptions = SolverOptions(),
) -> FitResult:
    """Group penalty ``lambda1`` plus elementwise L1 penalty ``lambda2``."""
    if lambda1 < 0 or lambda2 < 0:
        raise ValueError("penalties must be nonnegative")
    return _fit_sparse_group(v.X_minus, v.y, groups, lambda1, lambda2, opts)


# paired group lasso -------------------------------------------------------


def pairwise_lambda_max(m: ExpressionMatrix) -> float:
    """Smallest paired penalty whose solution is the zero matrix."""
    X = m.values
    n = X.shape[0]
    G = X.T @ X / n
    np.fill_diagonal(G, 0.0)
    return float(np.sqrt(2.0) * np.abs(G).max())


def paired_objective(X, theta, lam) -> float:
    n = X.shape[0]
    R = X - X @ theta
    upper = np.triu_indices(X.shape[1], 1)
    norms = np.hypot(theta[upper], theta.T[upper])
    return float((R**2).sum() / (2 * n) + lam * norms.sum())


def _paired_kkt(X, theta, lam) -> float:
    n, p = X.shape
    grad = X.T @ (X - X @ theta) / n
    V = theta + grad
    np.fill_diagonal(V, 0.0)
    upper = np.triu_indices(p, 1)
    a, b = V[upper], V.T[upper]
    nv = np.hypot(a, b)
    scale = np.where(nv > lam, 1 - lam / np.where(nv > 0, nv, 1.0), 0.0)
    P = np.zeros_like(theta)
    P[upper] = scale * a
    P.T[upper] = scale * b
    return float(np.abs(theta - P).max(initial=0.0))


def solve_paired_group(
    m: ExpressionMatrix, lam: float, opts: SolverOptions = SolverOptions(), warm=None
) -> PairedFit:
    """Joint node-wise regressions with the pair ``(theta_ij, theta_ji)`` penalized as one group.

    Minimizes ``(1/(2n)) sum_j ||x_j - X theta[:, j]||^2 + lam sum_{i<j}
    ||(theta_ij, theta_ji)||_2`` with a zero diagonal.
    """
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    if not m.standardized:
        raise ValueError("paired fits require a standardized matrix")
    X = np.ascontiguousarray(m.values, dtype=float)
    p = X.shape[1]
    theta = np.zeros((p, p)) if warm is None else np.array(warm, dtype=float)
    np.fill_diagonal(theta, 0.0)
    iters, ok = _kernels.bcd_paired(np.ascontiguousarray(X.T), float(lam), theta, opts.tol, opts.max_iter)
    kkt = _paired_kkt(X, theta, lam)
    upper = zip(*np.triu_indices(p, 1))
    norms = {(int(i), int(j)): float(np.hypot(theta[i, j], theta[j, i])) for i, j in upper}
    return PairedFit(
        matrix=theta,
        objective_value=paired_objective(X, theta, lam),
        iterations=int(iters),
        converged=bool(ok) and kkt < opts.kkt_tol,
        max_kkt_violation=kkt,
        pair_norms=norms,
    )
