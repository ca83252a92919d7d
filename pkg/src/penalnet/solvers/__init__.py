from .base import (
    FAMILIES,
    FitResult,
    InteractionFit,
    PairedFit,
    PenaltySpec,
    SolverOptions,
)
from .coordinate import (
    elastic_net_objective,
    lambda_max,
    ridge_closed_form,
    solve_elastic_net,
    solve_lasso,
    solve_ridge,
)
from .dispatch import PathFitter, grid_top
from .fused import fused_objective, solve_fused
from .group import (
    group_lambda_max,
    pairwise_lambda_max,
    solve_group,
    solve_paired_group,
    solve_sparse_group,
    sparse_group_objective,
)
from .hierarchical import (
    BudgetExceeded,
    count_pairwise_interactions,
    hierarchical_objective,
    solve_hierarchical,
)

__all__ = [
    "FAMILIES",
    "BudgetExceeded",
    "FitResult",
    "InteractionFit",
    "PairedFit",
    "PathFitter",
    "PenaltySpec",
    "SolverOptions",
    "count_pairwise_interactions",
    "elastic_net_objective",
    "fused_objective",
    "grid_top",
    "group_lambda_max",
    "hierarchical_objective",
    "lambda_max",
    "pairwise_lambda_max",
    "ridge_closed_form",
    "solve_elastic_net",
    "solve_fused",
    "solve_group",
    "solve_hierarchical",
    "solve_lasso",
    "solve_paired_group",
    "solve_ridge",
    "solve_sparse_group",
    "sparse_group_objective",
]
