"""Shared solver types.

Every solver minimizes ``(1/(2n)) ||y - X theta||^2 + P(theta)``. Relative to
the ``(1/n) ||y - X theta||^2 + lambda ||theta||_1`` form often quoted for the
lasso, ``lambda`` here is half of that one.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..grouping import GroupAssignment

FAMILIES = (
    "lasso",
    "ridge",
    "elastic_net",
    "fused",
    "group",
    "sparse_group",
    "paired_group",
    "hierarchical",
)
TWO_PARAMETER = ("elastic_net", "fused", "sparse_group")
GROUPED = ("group", "sparse_group")


@dataclass(frozen=True)
class SolverOptions:
    tol: float = 1e-6
    max_iter: int = 100_000
    kkt_tol: float = 1e-4
    rho: float = 1.0
    interaction_budget: int = 200_000

    def __post_init__(self):
        if self.tol <= 0 or self.kkt_tol <= 0 or self.rho <= 0:
            raise ValueError("tolerances and rho must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")


@dataclass(frozen=True)
class PenaltySpec:
    """A penalty family and its hyperparameters.

    ``lambda2`` is only meaningful for the two-parameter families; ``groups``
    only for the grouped ones. ``lambda_main`` is the main-effect penalty of
    the hierarchical family (defaults to ``lam``). ``order`` optionally fixes
    the fusion chain of the fused family.
    """

    family: str
    lam: float = 0.0
    lambda2: Optional[float] = None
    groups: Optional[GroupAssignment] = None
    lambda_main: Optional[float] = None
    order: Optional[tuple[int, ...]] = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown penalty family {self.family!r}")
        if self.lam < 0:
            raise ValueError("lambda must be nonnegative")
        if self.family in TWO_PARAMETER:
            if self.lambda2 is None:
                object.__setattr__(self, "lambda2", 0.0)
            elif self.lambda2 < 0:
                raise ValueError("lambda2 must be nonnegative")
        elif self.lambda2 not in (None, 0.0):
            raise ValueError(f"lambda2 is not a parameter of {self.family}")
        if self.family in GROUPED and self.groups is None:
            raise ValueError(f"{self.family} requires a group assignment")
        if self.family not in GROUPED and self.groups is not None:
            raise ValueError(f"{self.family} does not take groups")
        if self.lambda_main is not None and self.lambda_main < 0:
            raise ValueError("lambda_main must be nonnegative")

    def with_lambdas(self, lam: float, lambda2: Optional[float] = None) -> "PenaltySpec":
        kw = dict(self.__dict__)
        kw["lam"] = lam
        if lambda2 is not None:
            kw["lambda2"] = lambda2
        return PenaltySpec(**kw)


@dataclass(frozen=True)
class FitResult:
    coefficients: np.ndarray
    objective_value: float
    iterations: int
    converged: bool
    max_kkt_violation: float
    possibly_nonunique: bool = False


@dataclass(frozen=True)
class InteractionFit:
    main_plus: np.ndarray
    main_minus: np.ndarray
    interactions: np.ndarray
    objective_value: float
    iterations: int
    converged: bool
    max_kkt_violation: float

    @property
    def main_effects(self) -> np.ndarray:
        return self.main_plus - self.main_minus

    @property
    def coefficients(self) -> np.ndarray:
        return self.main_effects

    @property
    def hierarchy_slack(self) -> np.ndarray:
        return self.main_plus + self.main_minus - np.abs(self.interactions).sum(axis=1)


@dataclass(frozen=True)
class PairedFit:
    matrix: np.ndarray
    objective_value: float
    iterations: int
    converged: bool
    max_kkt_violation: float
    pair_norms: dict = field(default_factory=dict)


def possibly_nonunique(X: np.ndarray) -> bool:
    n, m = X.shape
    return n < m
