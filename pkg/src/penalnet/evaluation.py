"""Confusion-matrix scoring against a gold standard and the method benchmark."""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .expression import DataError, standardize
from .inference import (
    BinaryNetwork,
    GroupingConfig,
    PermutationConfig,
    infer_network,
    infer_paired,
    permutation_stability,
    quantile_filter,
    target_quantile,
)
from .selection import CVConfig
from .solvers import SolverOptions
from .synthetic import (
    GoldStandard,
    SimulationConfig,
    bundled_template,
    load_gold_standard,
    sample_subnetwork,
    simulate_expression,
)

log = logging.getLogger(__name__)

HEADER = ("method", "True", "Pred", "TP", "FP", "TN", "FN", "MCC", "TPR", "FPR", "ACC", "Time[sec]")

# benchmark name -> (penalty family, permutation wrapper)
METHODS = {
    "lasso": ("lasso", False),
    "ridge": ("ridge", False),
    "enet": ("elastic_net", False),
    "fused": ("fused", False),
    "group": ("group", False),
    "sgroup": ("sparse_group", False),
    "hier": ("hierarchical", False),
    "paired": ("paired_group", False),
    "labnet": ("lasso", True),
    "ridgeperm": ("ridge", True),
    "enetperm": ("elastic_net", True),
}
DEFAULT_METHODS = ("fused", "hier", "group", "labnet", "ridgeperm", "enetperm", "lasso", "ridge", "enet")


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    tn: int
    fn: int

    def __post_init__(self):
        if min(self.tp, self.fp, self.tn, self.fn) < 0:
            raise ValueError("confusion counts must be nonnegative")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


@dataclass(frozen=True)
class MetricsReport:
    """One benchmark row. ``mcc`` is None when a marginal sum is zero."""

    true_edges: int
    pred_edges: int
    counts: ConfusionCounts
    mcc: Optional[float]
    tpr: float
    fpr: float
    acc: float
    seconds: float
    method: str = ""
    size: int = 0
    error: Optional[str] = None

    @property
    def failed(self) -> bool:
        return self.error is not None


def confusion(pred: BinaryNetwork, gold: GoldStandard) -> ConfusionCounts:
    """Classify all ``p**2`` ordered cells; diagonal cells count as true negatives.

    Both networks must hold the same gene set; ``pred`` is re-indexed onto
    the gold gene order.
    """
    pred_set, gold_set = set(pred.gene_names), set(gold.gene_names)
    missing = [g for g in gold.gene_names if g not in pred_set]
    if missing:
        raise DataError(f"gene {missing[0]!r} of the gold standard is missing from the prediction")
    extra = [g for g in pred.gene_names if g not in gold_set]
    if extra:
        raise DataError(f"gene {extra[0]!r} of the prediction is missing from the gold standard")
    P = pred.align(gold.gene_names).edges
    G = gold.edges
    tp = int(np.sum(P & G))
    fp = int(np.sum(P & ~G))
    fn = int(np.sum(~P & G))
    p = len(gold.gene_names)
    return ConfusionCounts(tp, fp, p * p - tp - fp - fn, fn)


def compute_metrics(c: ConfusionCounts, seconds: float = 0.0) -> MetricsReport:
    tp, fp, tn, fn = c.tp, c.fp, c.tn, c.fn
    denom = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn)
    mcc = None if denom == 0 else (tp * tn - fp * fn) / math.sqrt(denom)
    tpr = tp / (tp + fn) if tp + fn else 0.0
    fpr = fp / (fp + tn) if fp + tn else 0.0
    acc = (tp + tn) / c.total if c.total else 0.0
    return MetricsReport(tp + fn, tp + fp, c, mcc, tpr, fpr, acc, float(seconds))


@dataclass(frozen=True)
class BenchmarkConfig:
    """Everything a benchmark run needs besides sizes and methods.

    ``edge_quantile=None`` picks, per size, the quantile that leaves about
    ``2 * True`` directed edges.
    """

    template: Optional[GoldStandard] = None
    n_samples: int = 100
    seed: int = 0
    simulation: SimulationConfig = SimulationConfig()
    cv: CVConfig = CVConfig()
    permutation: PermutationConfig = PermutationConfig()
    opts: SolverOptions = SolverOptions()
    grouping: GroupingConfig = GroupingConfig()
    edge_quantile: Optional[float] = None
    threads: int = 1
    lambdas: dict = field(default_factory=dict)

    def resolved_template(self, size: int) -> GoldStandard:
        """The configured template, else the bundled one large enough for ``size``."""
        if self.template is not None:
            return self.template
        return load_gold_standard(bundled_template("template15" if size <= 15 else "template1500"))


def _derive_seed(*parts) -> int:
    return int(np.random.SeedSequence([int(x) for x in parts]).generate_state(1, np.uint64)[0])


def _predict(method: str, m, cfg: BenchmarkConfig, true_edges: int) -> BinaryNetwork:
    family, perm = METHODS[method]
    fixed = cfg.lambdas.get(method)
    if family == "paired_group":
        w = infer_paired(m, None if fixed is None else fixed[0], cfg.opts)
    elif perm:
        w = permutation_stability(
            m, family, cfg.cv, cfg.permutation, cfg.opts, cfg.grouping, cfg.threads, fixed
        )
    else:
        w = infer_network(m, family, cfg.cv, cfg.opts, cfg.grouping, cfg.threads, fixed)
    p = m.n_genes
    q = cfg.edge_quantile if cfg.edge_quantile is not None else target_quantile(p, 2 * true_edges)
    return quantile_filter(w, q)


def run_one(method: str, gold: GoldStandard, m, cfg: BenchmarkConfig) -> MetricsReport:
    """Score one method on a standardized matrix; failures become rows with ``error`` set."""
    p = gold.n_genes
    start = time.perf_counter()
    try:
        pred = _predict(method, m, cfg, gold.n_edges)
        counts = confusion(pred, gold)
    except Exception as exc:  # recorded, the benchmark goes on
        log.error("method %s failed on %d genes: %s", method, p, exc)
        return MetricsReport(
            gold.n_edges, 0, ConfusionCounts(0, 0, 0, 0), None, 0.0, 0.0, 0.0,
            time.perf_counter() - start, method, p, f"{type(exc).__name__}: {exc}",
        )
    report = compute_metrics(counts, time.perf_counter() - start)
    return replace(report, method=method, size=p)


def benchmark_data(size: int, cfg: BenchmarkConfig):
    """Gold subnetwork and standardized simulated data for one size."""
    gold = sample_subnetwork(cfg.resolved_template(size), size, _derive_seed(cfg.seed, size, 0))
    sim = replace(cfg.simulation, n_samples=cfg.n_samples, seed=_derive_seed(cfg.seed, size, 1))
    return gold, standardize(simulate_expression(gold, sim))


def run_benchmark(sizes, methods=DEFAULT_METHODS, cfg: BenchmarkConfig = BenchmarkConfig()) -> list[MetricsReport]:
    """One report per ``(size, method)``; all methods of a size share data and gold standard."""
    unknown = [x for x in methods if x not in METHODS]
    if unknown:
        raise ValueError(f"unknown method {unknown[0]!r}; choose from {', '.join(METHODS)}")
    rows = []
    for size in sizes:
        gold, m = benchmark_data(size, cfg)
        for method in methods:
            rows.append(run_one(method, gold, m, cfg))
    return rows


def _fmt(x: Optional[float]) -> str:
    return "NA" if x is None else f"{x:.4f}"


def format_row(r: MetricsReport, timing: bool = True) -> str:
    c = r.counts
    if r.failed:
        cells = [r.method, str(r.true_edges)] + ["NA"] * 9 + [f"{r.seconds:.3f}" if timing else "-"]
    else:
        cells = [
            r.method, str(r.true_edges), str(r.pred_edges), str(c.tp), str(c.fp), str(c.tn), str(c.fn),
            _fmt(r.mcc), _fmt(r.tpr), _fmt(r.fpr), _fmt(r.acc), f"{r.seconds:.3f}" if timing else "-",
        ]
    return "\t".join(cells)


def format_reports(rows, timing: bool = True) -> str:
    return "\n".join(["\t".join(HEADER)] + [format_row(r, timing) for r in rows]) + "\n"


def write_reports(rows, path, timing: bool = True) -> None:
    Path(path).write_text(format_reports(rows, timing), encoding="utf-8")
