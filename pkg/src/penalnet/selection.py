"""K-fold cross-validation of the penalty strength over a geometric grid."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .expression import ResponseView
from .solvers import PathFitter, PenaltySpec, SolverOptions, grid_top
from .solvers.base import TWO_PARAMETER


@dataclass(frozen=True)
class CVConfig:
    folds: int = 10
    grid_size: int = 50
    grid_min_ratio: float = 1e-3
    seed: int = 0
    secondary_grid_size: int = 5

    def __post_init__(self):
        if self.folds < 2:
            raise ValueError("need at least 2 folds")
        if self.grid_size < 1 or self.secondary_grid_size < 1:
            raise ValueError("grid sizes must be positive")
        if not 0 < self.grid_min_ratio < 1:
            raise ValueError("grid_min_ratio must lie in (0, 1)")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class CVPoint:
    lam: float
    lambda2: Optional[float]
    mean_mse: float
    sd_mse: float


@dataclass(frozen=True)
class CVResult:
    best_lambda: float
    best_lambda2: Optional[float]
    cv_curve: tuple[CVPoint, ...]


def geometric_grid(top: float, size: int, min_ratio: float) -> list[float]:
    """``size`` values from ``top`` down to ``min_ratio * top``, evenly spaced in log."""
    if size == 1 or top <= 0:
        return [float(top)]
    return [float(top * min_ratio ** (k / (size - 1))) for k in range(size)]


def make_lambda_grid(v: ResponseView, cfg: CVConfig, top: float | None = None) -> list[float]:
    """Decreasing grid from the lasso ``lambda_max`` of ``v`` (or ``top``)."""
    if top is None:
        top = grid_top(PenaltySpec("lasso"), v.X_minus, v.y)[0]
    return geometric_grid(top, cfg.grid_size, cfg.grid_min_ratio)


def fold_indices(n: int, folds: int, rng: np.random.Generator) -> list[np.ndarray]:
    """Contiguous blocks of a random permutation of ``range(n)``."""
    if folds > n:
        raise ValueError(f"{folds} folds for {n} samples")
    parts = np.array_split(rng.permutation(n), folds)
    if min(len(p) for p in parts) < 2:
        raise ValueError(f"{folds} folds leave a fold with fewer than 2 of {n} samples")
    return [np.sort(p) for p in parts]


def cross_validate(
    v: ResponseView,
    penalty: PenaltySpec,
    cfg: CVConfig = CVConfig(),
    opts: SolverOptions = SolverOptions(),
    grid: list[float] | None = None,
) -> CVResult:
    """Select ``lam`` (and ``lambda2`` for two-parameter families) by held-out MSE.

    Folds come from a generator seeded with ``(cfg.seed, v.response_index)``.
    Among grid points with the minimal mean MSE the largest ``lam`` wins.
    """
    X, y = v.X_minus, v.y
    n = X.shape[0]
    rng = np.random.default_rng([cfg.seed, v.response_index])
    folds = fold_indices(n, cfg.folds, rng)

    top, top2 = grid_top(penalty, X, y)
    grid = geometric_grid(top, cfg.grid_size, cfg.grid_min_ratio) if grid is None else sorted(grid, reverse=True)
    if penalty.family in TWO_PARAMETER:
        grid2 = geometric_grid(top2, cfg.secondary_grid_size, cfg.grid_min_ratio)
    else:
        grid2 = [None]

    mse = np.empty((len(folds), len(grid2), len(grid)))
    for f, val in enumerate(folds):
        train = np.setdiff1d(np.arange(n), val, assume_unique=True)
        fitter = PathFitter(penalty, X[train], y[train], opts)
        for b, lam2 in enumerate(grid2):
            fitter.reset()
            for a, lam in enumerate(grid):
                coef = fitter.fit(lam, lam2).coefficients
                r = y[val] - X[val] @ coef
                mse[f, b, a] = r @ r / len(val)

    mean = mse.mean(axis=0)
    sd = mse.std(axis=0)
    # grids are decreasing: the smallest column index among the minima is the
    # largest lambda, then the smallest row index the largest lambda2
    rows, cols = np.nonzero(mean == mean.min())
    a = int(cols.min())
    b = int(rows[cols == a].min())
    curve = tuple(
        CVPoint(grid[j], grid2[i], float(mean[i, j]), float(sd[i, j]))
        for i in range(len(grid2))
        for j in range(len(grid))
    )
    return CVResult(float(grid[a]), grid2[b], curve)
