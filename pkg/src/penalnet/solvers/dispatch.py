"""Uniform fitting interface over the node-wise penalty families."""

from __future__ import annotations

import copy

import numpy as np

from .base import PenaltySpec, SolverOptions
from .coordinate import _fit_elastic_net, _lambda_max
from .fused import FusedSystem, _fit_fused
from .group import _Blocks, _fit_sparse_group, group_lambda_max
from .hierarchical import HierSystem, _fit_hierarchical, hierarchical_lambda_max


class PathFitter:
    """Fits one family on fixed ``(X, y)``, reusing factorizations and warm starts.

    ``fit(lam, lambda2)`` returns the fit result; successive calls start from
    the previous solution, which makes decreasing-lambda paths cheap.
    """

    def __init__(self, spec: PenaltySpec, X, y, opts: SolverOptions):
        if spec.family == "paired_group":
            raise ValueError("paired_group is a joint fit, not a node-wise family")
        self.spec = spec
        self.X = np.ascontiguousarray(X, dtype=float)
        self.y = np.ascontiguousarray(y, dtype=float)
        self.opts = opts
        self.state = None
        family = spec.family
        m = self.X.shape[1]
        if family == "fused":
            self.order = np.arange(m) if spec.order is None else np.asarray(spec.order)
            self.system = FusedSystem(self.X, self.y, opts.rho)
        elif family in ("group", "sparse_group"):
            self.system = _Blocks(self.X, spec.groups)
        elif family == "hierarchical":
            self.system = HierSystem(self.X, self.y, opts.rho, opts.interaction_budget)
            # keep the main-effect/interaction ratio of the spec along a path
            self.main_ratio = 1.0 if spec.lambda_main is None or spec.lam == 0 else spec.lambda_main / spec.lam
        else:
            self.system = None

    def reset(self):
        self.state = None

    def with_response(self, y) -> "PathFitter":
        """A fitter for the same design and penalty but a new response.

        Factorizations that depend only on ``X`` are shared.
        """
        clone = copy.copy(self)
        clone.y = np.ascontiguousarray(y, dtype=float)
        clone.state = None
        if self.spec.family in ("fused", "hierarchical"):
            system = copy.copy(self.system)
            system.y = clone.y
            if self.spec.family == "fused":
                system.Xty = self.X.T @ clone.y / self.X.shape[0]
            clone.system = system
        return clone

    def fit(self, lam: float, lambda2: float | None = None):
        spec, X, y, opts = self.spec, self.X, self.y, self.opts
        lambda2 = spec.lambda2 if lambda2 is None else lambda2
        family = spec.family
        if family in ("lasso", "ridge", "elastic_net"):
            l1, l2 = {"lasso": (lam, 0.0), "ridge": (0.0, lam), "elastic_net": (lam, lambda2)}[family]
            fit = _fit_elastic_net(X, y, l1, l2, opts, warm=self.state)
            self.state = fit.coefficients
        elif family in ("group", "sparse_group"):
            l1 = lambda2 if family == "sparse_group" else 0.0
            fit = _fit_sparse_group(X, y, spec.groups, lam, l1, opts, warm=self.state, blocks=self.system)
            self.state = fit.coefficients
        elif family == "fused":
            fit, self.state = _fit_fused(X, y, lam, lambda2, self.order, opts, warm=self.state, system=self.system)
        else:
            fit, self.state = _fit_hierarchical(
                X, y, lam, self.main_ratio * lam, opts, warm=self.state, system=self.system
            )
        return fit


def grid_top(spec: PenaltySpec, X, y) -> tuple[float, float]:
    """Upper ends of the primary and secondary penalty grids for ``spec.family``."""
    lasso_top = _lambda_max(X, y)
    if spec.family in ("group", "sparse_group"):
        return group_lambda_max(X, y, spec.groups), lasso_top
    if spec.family == "hierarchical":
        return hierarchical_lambda_max(X, y), lasso_top
    return lasso_top, lasso_top
