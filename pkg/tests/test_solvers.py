import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from freeze_oracles import strong_null_view
from frozen import FROZEN
from instances import matrix, view
from penalnet.expression import ExpressionMatrix, response_view, standardize
from penalnet.grouping import GroupAssignment
from penalnet.solvers import (
    BudgetExceeded,
    PathFitter,
    PenaltySpec,
    SolverOptions,
    count_pairwise_interactions,
    lambda_max,
    pairwise_lambda_max,
    ridge_closed_form,
    solve_elastic_net,
    solve_fused,
    solve_group,
    solve_hierarchical,
    solve_lasso,
    solve_paired_group,
    solve_ridge,
    solve_sparse_group,
)
from penalnet.solvers.coordinate import elastic_net_kkt

TIGHT = SolverOptions(tol=1e-12)


def one_predictor(xty):
    """Standardized predictor x and response y with x'y/n = xty."""
    x = np.array([1.0, -1.0, 1.0, -1.0])
    z = np.array([1.0, 1.0, -1.0, -1.0])
    y = xty * x + np.sqrt(1 - xty**2) * z
    m = ExpressionMatrix(np.column_stack([y, x]), ("y", "x"))
    return response_view(standardize(m), 0)


# lasso ----------------------------------------------------------------------


def test_lasso_scalar_soft_threshold():
    v = one_predictor(0.8)
    assert solve_lasso(v, 0.5, TIGHT).coefficients[0] == pytest.approx(0.3, abs=1e-12)


def test_lasso_zero_at_lambda_max():
    v = view(1, 30, 5)
    fit = solve_lasso(v, lambda_max(v))
    assert np.all(fit.coefficients == 0.0)


def test_lasso_matches_frozen_oracle():
    f = FROZEN["lasso"]
    fit = solve_lasso(view(f["seed"], f["n"], f["m"]), f["lam"], TIGHT)
    assert fit.objective_value == pytest.approx(f["objective"], abs=1e-6)
    np.testing.assert_allclose(fit.coefficients, f["argmin"], atol=1e-6)


def test_lambda_max_bracketing():
    v = view(2, 40, 6)
    top = lambda_max(v)
    assert np.all(solve_lasso(v, 1.001 * top).coefficients == 0)
    assert np.count_nonzero(solve_lasso(v, 0.9 * top).coefficients) >= 1


def test_lambda_max_special_cases():
    v = one_predictor(0.0)
    assert lambda_max(v) == pytest.approx(0.0, abs=1e-12)
    x = np.random.default_rng(3).normal(size=20)
    m = standardize(ExpressionMatrix(np.column_stack([x, x, np.sin(np.arange(20))]), ("a", "b", "c")))
    assert lambda_max(response_view(m, 0)) == pytest.approx(1.0)


def test_lasso_kkt_and_monotone_shrinkage():
    v = view(4, 50, 8)
    top = lambda_max(v)
    norms = []
    for lam in top * np.geomspace(1, 1e-3, 20):
        fit = solve_lasso(v, lam)
        assert fit.converged
        assert fit.max_kkt_violation < 1e-4
        norms.append(np.abs(fit.coefficients).sum())
    assert all(a <= b + 1e-9 for a, b in zip(norms, norms[1:]))


def test_nonconvergence_reported_not_raised():
    v = view(5, 30, 6)
    fit = solve_lasso(v, 0.01, SolverOptions(max_iter=1))
    assert not fit.converged
    assert fit.iterations == 1


def test_possibly_nonunique_flag():
    assert solve_lasso(view(6, 5, 8), 0.1).possibly_nonunique
    assert not solve_lasso(view(6, 20, 3), 0.1).possibly_nonunique


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10_000), frac=st.floats(0.01, 1.0))
def test_lasso_kkt_property(seed, frac):
    v = view(seed, 25, 4)
    lam = frac * lambda_max(v)
    fit = solve_lasso(v, lam)
    assert elastic_net_kkt(v.X_minus, v.y, fit.coefficients, lam, 0.0) < 1e-4


# ridge / elastic net -------------------------------------------------------


def test_ridge_scalar_closed_form():
    # x'x = 2, x'y = 2, closed-form penalty 2 -> 0.5
    X = np.array([[1.0], [-1.0]])
    y = np.array([1.0, -1.0])
    from penalnet.expression import ResponseView

    v = ResponseView(0, y, X)
    assert ridge_closed_form(v, 2.0)[0] == pytest.approx(0.5)
    # the same problem in solver scaling: lambda_cf = n * lambda
    assert solve_ridge(v, 1.0, TIGHT).coefficients[0] == pytest.approx(0.5, abs=1e-10)


def test_ridge_closed_form_identity_example():
    from penalnet.expression import ResponseView

    v = ResponseView(0, np.array([2.0, 4.0]), np.eye(2))
    np.testing.assert_allclose(ridge_closed_form(v, 1.0), [1.0, 2.0])


def test_ridge_closed_form_singular_at_zero():
    from penalnet.expression import ResponseView

    X = np.array([[1.0, 1.0], [2.0, 2.0], [3.0, 3.0]])
    with pytest.raises(np.linalg.LinAlgError):
        ridge_closed_form(ResponseView(0, np.ones(3), X), 0.0)


def test_ridge_closed_form_shrinks_monotonically():
    v = view(7, 20, 5)
    norms = [np.linalg.norm(ridge_closed_form(v, lam)) for lam in np.geomspace(1e-2, 1e6, 30)]
    assert all(b <= a for a, b in zip(norms, norms[1:]))
    assert norms[-1] < 1e-4


def test_ridge_matches_closed_form_and_ols():
    v = view(8, 8, 4)
    fit = solve_ridge(v, 0.3, TIGHT)
    np.testing.assert_allclose(fit.coefficients, ridge_closed_form(v, 8 * 0.3), rtol=1e-6)
    assert np.all(fit.coefficients != 0)
    v = view(9, 40, 4)
    ols = np.linalg.lstsq(v.X_minus, v.y, rcond=None)[0]
    np.testing.assert_allclose(solve_ridge(v, 0.0, TIGHT).coefficients, ols, atol=1e-8)


def test_elastic_net_scalar_and_degeneracy():
    v = one_predictor(0.8)
    assert solve_elastic_net(v, 0.5, 1.0, TIGHT).coefficients[0] == pytest.approx(0.15, abs=1e-12)
    v = view(10, 30, 5)
    np.testing.assert_allclose(
        solve_elastic_net(v, 0.1, 0.0, TIGHT).coefficients, solve_lasso(v, 0.1, TIGHT).coefficients, atol=1e-10
    )
    np.testing.assert_allclose(
        solve_elastic_net(v, 0.0, 0.4, TIGHT).coefficients, solve_ridge(v, 0.4, TIGHT).coefficients, atol=1e-10
    )


# fused ----------------------------------------------------------------------


def test_fused_unpenalized_is_ols():
    v = view(11, 40, 4)
    ols = np.linalg.lstsq(v.X_minus, v.y, rcond=None)[0]
    np.testing.assert_allclose(solve_fused(v, 0.0, 0.0, opts=TIGHT).coefficients, ols, atol=1e-6)


def test_fused_large_fusion_collapses():
    v = view(12, 40, 4)
    fit = solve_fused(v, 0.0, 1e3 * lambda_max(v), opts=SolverOptions(tol=1e-10))
    s = v.X_minus.sum(axis=1)
    c = s @ v.y / (s @ s)
    np.testing.assert_allclose(fit.coefficients, c, atol=1e-4)


def test_fused_matches_frozen_oracle():
    f = FROZEN["fused"]
    fit = solve_fused(view(f["seed"], f["n"], f["m"]), f["l1"], f["l2"], opts=TIGHT)
    assert fit.objective_value == pytest.approx(f["objective"], abs=1e-5)


def test_fused_rejects_bad_order():
    v = view(13, 20, 3)
    with pytest.raises(ValueError):
        solve_fused(v, 0.1, 0.1, order=[0, 0, 1])


def test_fused_reports_original_indexing():
    v = view(14, 30, 4)
    order = [2, 0, 3, 1]
    fit = solve_fused(v, 0.05, 0.1, order=order, opts=TIGHT)
    perm_v = type(v)(0, v.y, v.X_minus[:, order])
    fit_p = solve_fused(perm_v, 0.05, 0.1, opts=TIGHT)
    np.testing.assert_allclose(fit.coefficients[order], fit_p.coefficients, atol=1e-8)


# group / sparse group ----------------------------------------------------


def test_group_orthonormal_block_threshold():
    # four orthonormal predictors, z = X'y/n with norm 1
    n = 4
    H = np.array([[1, 1, 1, 1], [1, -1, 1, -1], [1, 1, -1, -1], [1, -1, -1, 1]], dtype=float)
    X = H[:, 1:]  # mean zero, x'x/n = 1, orthogonal
    z = np.array([0.6, 0.8, 0.0])
    y = X @ z
    from penalnet.expression import ResponseView

    v = ResponseView(0, y, X)
    one = GroupAssignment((0, 0, 0))
    # block norm 1 and weight sqrt(3): zero iff lam * sqrt(3) >= 1
    assert np.all(solve_group(v, 0.6, one, TIGHT).coefficients == 0)
    fit = solve_group(v, 0.5, one, TIGHT)
    np.testing.assert_allclose(fit.coefficients, (1 - 0.5 * np.sqrt(3)) * z, atol=1e-10)


def test_group_singletons_equal_lasso():
    v = view(15, 30, 5)
    fit = solve_group(v, 0.1, GroupAssignment.singletons(5), TIGHT)
    np.testing.assert_allclose(fit.coefficients, solve_lasso(v, 0.1, TIGHT).coefficients, atol=1e-8)


def test_group_matches_frozen_oracle():
    f = FROZEN["group"]
    fit = solve_group(view(f["seed"], f["n"], f["m"]), f["lam"], GroupAssignment(f["labels"]), TIGHT)
    assert fit.objective_value == pytest.approx(f["objective"], abs=1e-5)


def test_sparse_group_degeneracies():
    v = view(16, 30, 6)
    g = GroupAssignment((0, 0, 1, 1, 2, 2))
    np.testing.assert_allclose(
        solve_sparse_group(v, 0.1, 0.0, g, TIGHT).coefficients, solve_group(v, 0.1, g, TIGHT).coefficients, atol=1e-8
    )
    np.testing.assert_allclose(
        solve_sparse_group(v, 0.0, 0.1, g, TIGHT).coefficients, solve_lasso(v, 0.1, TIGHT).coefficients, atol=1e-8
    )


def test_sparse_group_within_group_sparsity():
    f = FROZEN["sparse_group_strong_null"]
    v = strong_null_view()
    fit = solve_sparse_group(v, f["l_group"], f["l1"], GroupAssignment((0, 0)), TIGHT)
    assert fit.coefficients[0] != 0 and fit.coefficients[1] == 0.0
    # the oracle agrees that the null coefficient sits at zero
    assert abs(f["argmin"][1]) < 1e-6
    assert fit.objective_value == pytest.approx(f["objective"], abs=1e-6)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 10_000), frac=st.floats(0.05, 1.2))
def test_group_blocks_all_or_nothing(seed, frac):
    v = view(seed, 20, 6)
    g = GroupAssignment((0, 1, 0, 2, 1, 2))
    from penalnet.solvers import group_lambda_max

    fit = solve_group(v, frac * group_lambda_max(v.X_minus, v.y, g), g)
    for k in range(g.k):
        block = fit.coefficients[g.members(k)]
        assert np.all(np.abs(block) <= 1e-12) or np.all(np.abs(block) > 1e-12)


# paired ---------------------------------------------------------------------


def test_paired_full_shrinkage_and_oracle():
    m = matrix(17, 30, 5)
    assert np.all(solve_paired_group(m, pairwise_lambda_max(m)).matrix == 0)
    f = FROZEN["paired"]
    fit = solve_paired_group(matrix(f["seed"], f["n"], f["p"]), f["lam"], TIGHT)
    assert fit.objective_value == pytest.approx(f["objective"], abs=1e-5)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 10_000), frac=st.floats(0.01, 1.0))
def test_paired_zero_pattern(seed, frac):
    m = matrix(seed, 15, 5)
    fit = solve_paired_group(m, frac * pairwise_lambda_max(m))
    T = fit.matrix
    assert np.all(np.diag(T) == 0)
    assert np.array_equal(T == 0, T.T == 0)
    for (i, j), norm in fit.pair_norms.items():
        assert norm == pytest.approx(np.hypot(T[i, j], T[j, i]))


# hierarchical ---------------------------------------------------------------


def test_count_pairwise_interactions():
    assert count_pairwise_interactions(50) == 1225
    assert count_pairwise_interactions(1000) == 499500
    assert count_pairwise_interactions(0) == count_pairwise_interactions(1) == 0


def test_hierarchical_huge_lambda_is_zero():
    fit = solve_hierarchical(matrix(18, 20, 4), 0, 1e3)
    assert np.all(fit.main_effects == 0) and np.all(fit.interactions == 0)
    assert np.all(fit.hierarchy_slack >= 0)


def test_hierarchical_matches_frozen_oracle():
    f = FROZEN["hierarchical"]
    fit = solve_hierarchical(matrix(f["seed"], f["n"], f["m"] + 1), 0, f["lam"], SolverOptions(tol=1e-9))
    assert fit.objective_value == pytest.approx(f["objective"], abs=1e-4)
    T = fit.interactions
    assert np.array_equal(T, T.T) and np.all(np.diag(T) == 0)
    assert np.all(fit.main_plus >= 0) and np.all(fit.main_minus >= 0)


def test_hierarchical_pure_main_effects():
    rng = np.random.default_rng(19)
    n = 200
    X = rng.normal(size=(n, 4))
    y = X @ np.array([1.0, -0.8, 0.0, 0.5]) + 0.1 * rng.normal(size=n)
    m = standardize(ExpressionMatrix(np.column_stack([y, X]), tuple("yabcd")))
    lam = 0.05
    fit = solve_hierarchical(m, 0, lam, SolverOptions(tol=1e-9))
    assert np.abs(fit.interactions).max() < 1e-6
    assert np.array_equal(np.sign(fit.main_effects[[0, 1, 3]]), [1, -1, 1])
    lasso = solve_lasso(response_view(m, 0), lam, TIGHT)
    assert abs(fit.objective_value - lasso.objective_value) <= 1e-4


def test_hierarchical_budget_guard():
    with pytest.raises(BudgetExceeded):
        solve_hierarchical(matrix(20, 10, 6), 0, 0.1, SolverOptions(interaction_budget=5))


# shared behaviour ---------------------------------------------------------


@pytest.mark.parametrize("family", ["lasso", "ridge", "elastic_net", "fused", "group", "sparse_group", "hierarchical"])
def test_path_fitter_warm_start_agrees_with_cold(family):
    v = view(21, 30, 4)
    groups = GroupAssignment((0, 0, 1, 1)) if family in ("group", "sparse_group") else None
    spec = PenaltySpec(family, groups=groups)
    opts = SolverOptions(tol=1e-10)
    warm = PathFitter(spec, v.X_minus, v.y, opts)
    for lam in (0.5, 0.2, 0.05):
        w = warm.fit(lam, 0.02 if family in ("elastic_net", "fused", "sparse_group") else None)
    cold = PathFitter(spec, v.X_minus, v.y, opts).fit(0.05, 0.02 if family in ("elastic_net", "fused", "sparse_group") else None)
    assert w.objective_value == pytest.approx(cold.objective_value, abs=1e-7)


def test_determinism_bit_identical():
    v = view(22, 30, 5)
    a = solve_fused(v, 0.05, 0.05)
    b = solve_fused(v, 0.05, 0.05)
    assert np.array_equal(a.coefficients, b.coefficients)


def test_penalty_spec_validation():
    with pytest.raises(ValueError):
        PenaltySpec("lasso", lam=-1)
    with pytest.raises(ValueError):
        PenaltySpec("lasso", lambda2=0.3)
    with pytest.raises(ValueError):
        PenaltySpec("group")
    with pytest.raises(ValueError):
        PenaltySpec("bogus")
    assert PenaltySpec("fused").lambda2 == 0.0
