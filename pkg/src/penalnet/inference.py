"""Node-wise network inference, edge filtering and permutation stability."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .expression import DataError, ExpressionMatrix, response_view
from .grouping import LINKAGES, GroupAssignment, cluster_predictors, correlation_matrix, order_predictors
from .selection import CVConfig, cross_validate
from .solvers import PathFitter, PenaltySpec, SolverOptions, pairwise_lambda_max, solve_paired_group

log = logging.getLogger(__name__)

SYMMETRIZE_RULES = ("and", "or", "none")


@dataclass(frozen=True)
class WeightedNetwork:
    """``weights[i, j]``: coefficient of gene ``i`` in the regression of gene ``j``."""

    weights: np.ndarray
    gene_names: tuple[str, ...]
    diagnostics: tuple = field(default=(), compare=False)

    def __post_init__(self):
        w = np.array(self.weights, dtype=float, copy=True)
        p = len(self.gene_names)
        if w.shape != (p, p):
            raise DataError(f"weight matrix shape {w.shape} does not match {p} genes")
        if not np.all(np.isfinite(w)):
            raise DataError("network weights must be finite")
        if np.any(w.diagonal() != 0):
            raise DataError("network diagonal must be zero")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "gene_names", tuple(self.gene_names))


@dataclass(frozen=True)
class BinaryNetwork:
    edges: np.ndarray
    gene_names: tuple[str, ...]
    directed: bool = True

    def __post_init__(self):
        e = np.array(self.edges, dtype=bool, copy=True)
        p = len(self.gene_names)
        if e.shape != (p, p):
            raise DataError(f"edge matrix shape {e.shape} does not match {p} genes")
        if e.diagonal().any():
            raise DataError("network diagonal must be empty")
        if not self.directed and not np.array_equal(e, e.T):
            raise DataError("undirected network must be symmetric")
        e.setflags(write=False)
        object.__setattr__(self, "edges", e)
        object.__setattr__(self, "gene_names", tuple(self.gene_names))

    @property
    def n_edges(self) -> int:
        return int(self.edges.sum())

    def align(self, names) -> "BinaryNetwork":
        """Re-index onto ``names``; every gene of this network must appear there."""
        names = tuple(names)
        pos = {g: i for i, g in enumerate(names)}
        missing = [g for g in self.gene_names if g not in pos]
        if missing:
            raise DataError(f"gene {missing[0]!r} is missing from the reference gene set")
        idx = np.array([pos[g] for g in self.gene_names], dtype=int)
        out = np.zeros((len(names), len(names)), dtype=bool)
        out[np.ix_(idx, idx)] = self.edges
        return BinaryNetwork(out, names, self.directed)


@dataclass(frozen=True)
class PermutationConfig:
    num_permutations: int = 100
    alpha: float = 0.05
    seed: int = 0

    def __post_init__(self):
        if self.num_permutations < 1:
            raise ValueError("need at least one permutation")
        if not 0 < self.alpha <= 1:
            raise ValueError("alpha must lie in (0, 1]")


@dataclass(frozen=True)
class GroupingConfig:
    """How group and fused penalties get their predictor structure.

    With ``per_response`` (the default) predictors are re-clustered for every
    response gene; otherwise all genes are clustered once and each response
    uses the restriction of that clustering.
    """

    k_group: int = 3
    k_fused: int = 10
    linkage: str = "average"
    per_response: bool = True

    def __post_init__(self):
        if self.k_group < 1 or self.k_fused < 1:
            raise ValueError("cluster counts must be positive")
        if self.linkage not in LINKAGES:
            raise ValueError(f"unknown linkage {self.linkage!r}")


@dataclass(frozen=True)
class ColumnDiagnostics:
    response: str
    lam: float
    lambda2: Optional[float]
    converged: bool
    iterations: int
    max_kkt_violation: float


def _relabel(labels) -> GroupAssignment:
    seen: dict[int, int] = {}
    return GroupAssignment(tuple(seen.setdefault(int(g), len(seen)) for g in labels))


class _Structure:
    """Group/order structure for each response gene."""

    def __init__(self, m: ExpressionMatrix, family: str, cfg: GroupingConfig):
        self.family = family
        self.cfg = cfg
        self.global_labels = None
        if family in ("group", "sparse_group", "fused") and not cfg.per_response:
            C, _ = correlation_matrix(m.values)
            self.global_labels = cluster_predictors(C, min(self._k, m.n_genes), cfg.linkage).labels

    @property
    def _k(self) -> int:
        return self.cfg.k_fused if self.family == "fused" else self.cfg.k_group

    def spec_for(self, base: PenaltySpec, a: int, X_minus: np.ndarray) -> PenaltySpec:
        if self.family not in ("group", "sparse_group", "fused"):
            return base
        if self.global_labels is not None:
            assignment = _relabel(np.delete(np.asarray(self.global_labels), a))
        else:
            C, _ = correlation_matrix(X_minus)
            assignment = cluster_predictors(C, min(self._k, X_minus.shape[1]), self.cfg.linkage)
        kw = dict(base.__dict__)
        if self.family == "fused":
            kw["order"] = order_predictors(assignment)
        else:
            kw["groups"] = assignment
        return PenaltySpec(**kw)


def _as_spec(penalty) -> PenaltySpec:
    if isinstance(penalty, PenaltySpec):
        return penalty
    family = str(penalty)
    if family in ("group", "sparse_group"):
        # placeholder structure, replaced per response
        return PenaltySpec(family, groups=GroupAssignment((0,)))
    return PenaltySpec(family)


def _prepare(m, penalty, grouping):
    if not m.standardized:
        raise DataError("network inference requires a standardized matrix")
    spec = _as_spec(penalty)
    if spec.family == "paired_group":
        raise ValueError("paired_group is fitted jointly; use infer_paired")
    return spec, _Structure(m, spec.family, grouping)


def _fit_response(m, a, spec, structure, cv, opts, lambdas):
    """CV-select the penalty for gene ``a`` and fit; returns (fitter, coef, diagnostics, lam, lam2)."""
    v = response_view(m, a)
    gene_spec = structure.spec_for(spec, a, v.X_minus)
    if lambdas is None:
        res = cross_validate(v, gene_spec, cv, opts)
        lam, lam2 = res.best_lambda, res.best_lambda2
    else:
        lam, lam2 = lambdas
    fitter = PathFitter(gene_spec, v.X_minus, v.y, opts)
    fit = fitter.fit(lam, lam2)
    diag = ColumnDiagnostics(
        m.gene_names[a], lam, lam2, fit.converged, fit.iterations, fit.max_kkt_violation
    )
    if not fit.converged:
        log.warning("fit for response %s did not converge (%d iterations)", m.gene_names[a], fit.iterations)
    return fitter, np.asarray(fit.coefficients), diag, lam, lam2


def _map(fn, items, threads: int):
    if threads <= 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _assemble(m, columns):
    p = m.n_genes
    W = np.zeros((p, p))
    for a, coef in enumerate(columns):
        W[np.arange(p) != a, a] = coef
    return W


def infer_network(
    m: ExpressionMatrix,
    penalty,
    cv: CVConfig = CVConfig(),
    opts: SolverOptions = SolverOptions(),
    grouping: GroupingConfig = GroupingConfig(),
    threads: int = 1,
    lambdas: tuple[float, Optional[float]] | None = None,
) -> WeightedNetwork:
    """Regress every gene on all others and collect the coefficients column-wise.

    ``penalty`` is a family name or a :class:`PenaltySpec` (its lambdas are
    ignored unless ``lambdas`` is given, which bypasses cross-validation).
    """
    spec, structure = _prepare(m, penalty, grouping)

    def work(a):
        _, coef, diag, _, _ = _fit_response(m, a, spec, structure, cv, opts, lambdas)
        return coef, diag

    results = _map(work, range(m.n_genes), threads)
    W = _assemble(m, [r[0] for r in results])
    return WeightedNetwork(W, m.gene_names, tuple(r[1] for r in results))


def permutation_stability(
    m: ExpressionMatrix,
    penalty,
    cv: CVConfig = CVConfig(),
    pcfg: PermutationConfig = PermutationConfig(),
    opts: SolverOptions = SolverOptions(),
    grouping: GroupingConfig = GroupingConfig(),
    threads: int = 1,
    lambdas: tuple[float, Optional[float]] | None = None,
) -> WeightedNetwork:
    """Keep only coefficients that beat a per-response permutation null.

    For each response gene the penalty is selected once on the original data.
    The response is then permuted ``num_permutations`` times (predictors
    untouched) and refitted at the same penalty; the absolute coefficients of
    all refits form the null. A coefficient survives if its magnitude strictly
    exceeds the ``1 - alpha`` quantile of that null.
    """
    spec, structure = _prepare(m, penalty, grouping)

    def work(a):
        fitter, coef, diag, lam, lam2 = _fit_response(m, a, spec, structure, cv, opts, lambdas)
        null = np.empty((pcfg.num_permutations, len(coef)))
        for k in range(pcfg.num_permutations):
            rng = np.random.default_rng([pcfg.seed, a, k])
            refit = fitter.with_response(rng.permutation(fitter.y))
            null[k] = np.abs(refit.fit(lam, lam2).coefficients)
        thr = np.quantile(null.ravel(), 1.0 - pcfg.alpha)
        return np.where(np.abs(coef) > thr, coef, 0.0), diag

    results = _map(work, range(m.n_genes), threads)
    W = _assemble(m, [r[0] for r in results])
    return WeightedNetwork(W, m.gene_names, tuple(r[1] for r in results))


def infer_paired(
    m: ExpressionMatrix, lam: float | None = None, opts: SolverOptions = SolverOptions()
) -> WeightedNetwork:
    """Paired group lasso network; ``lam`` defaults to a tenth of the all-zero threshold."""
    if lam is None:
        lam = 0.1 * pairwise_lambda_max(m)
    fit = solve_paired_group(m, lam, opts)
    diag = ColumnDiagnostics("*", lam, None, fit.converged, fit.iterations, fit.max_kkt_violation)
    return WeightedNetwork(fit.matrix, m.gene_names, (diag,))


def quantile_filter(w: WeightedNetwork, q: float) -> BinaryNetwork:
    """Keep edges whose absolute weight strictly exceeds the ``q`` quantile of off-diagonal magnitudes."""
    if not 0 <= q < 1:
        raise ValueError("q must lie in [0, 1)")
    A = np.abs(w.weights)
    off = ~np.eye(A.shape[0], dtype=bool)
    thr = np.quantile(A[off], q)
    return BinaryNetwork((A > thr) & off, w.gene_names, directed=True)


def target_quantile(n_genes: int, n_edges: int) -> float:
    """Quantile that leaves about ``n_edges`` of the ``p(p-1)`` directed cells."""
    cells = n_genes * (n_genes - 1)
    return float(min(max(1.0 - n_edges / cells, 0.0), 1.0 - 1e-12))


def symmetrize(b: BinaryNetwork, rule: str) -> BinaryNetwork:
    rule = rule.lower()
    if rule not in SYMMETRIZE_RULES:
        raise ValueError(f"unknown symmetrization rule {rule!r}")
    if rule == "none":
        return b
    e = b.edges & b.edges.T if rule == "and" else b.edges | b.edges.T
    return BinaryNetwork(e, b.gene_names, directed=False)


# edge-list files ----------------------------------------------------------


def _emit(text: str, path) -> None:
    if hasattr(path, "write"):
        path.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def write_weighted_edges(w: WeightedNetwork, path) -> None:
    """``source<TAB>target<TAB>weight`` for every nonzero weight, row-major.

    ``path`` may also be an open text stream.
    """
    lines = [
        f"{w.gene_names[i]}\t{w.gene_names[j]}\t{w.weights[i, j]:.17g}\n"
        for i, j in zip(*np.nonzero(w.weights))
    ]
    _emit("".join(lines), path)


def write_binary_edges(b: BinaryNetwork, path) -> None:
    """``source<TAB>target`` per edge; undirected networks list each pair once."""
    E = b.edges if b.directed else np.triu(b.edges)
    _emit("".join(f"{b.gene_names[i]}\t{b.gene_names[j]}\n" for i, j in zip(*np.nonzero(E))), path)


def read_edges(path) -> BinaryNetwork:
    """Read a 2- or 3-column edge list; a third column of 0 marks an absent edge."""
    path = Path(path)
    names: dict[str, int] = {}
    pairs = []
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\r\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) not in (2, 3):
                raise DataError(f"{path}: malformed line {lineno}: {line!r}")
            src, dst = parts[0].strip(), parts[1].strip()
            if src == dst:
                raise DataError(f"{path}: self-edge {src} on line {lineno}")
            present = True
            if len(parts) == 3:
                try:
                    present = float(parts[2]) != 0.0
                except ValueError:
                    raise DataError(f"{path}: non-numeric weight on line {lineno}") from None
            names.setdefault(src, len(names))
            names.setdefault(dst, len(names))
            if present:
                pairs.append((names[src], names[dst]))
    E = np.zeros((len(names), len(names)), dtype=bool)
    for i, j in pairs:
        E[i, j] = True
    return BinaryNetwork(E, tuple(names), directed=True)
