"""Command-line entry point: ``penalnet {simulate,infer,eval,bench}``.

Exit status is 0 on success, 1 on usage errors and 2 on data errors.
Diagnostics go to the error stream; results go to ``--out`` or standard output.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .evaluation import (
    DEFAULT_METHODS,
    METHODS,
    BenchmarkConfig,
    compute_metrics,
    confusion,
    format_reports,
    run_benchmark,
)
from .expression import DataError, load_expression, save_expression, standardize
from .grouping import LINKAGES
from .inference import (
    SYMMETRIZE_RULES,
    GroupingConfig,
    PermutationConfig,
    infer_network,
    infer_paired,
    permutation_stability,
    quantile_filter,
    read_edges,
    symmetrize,
    write_binary_edges,
    write_weighted_edges,
)
from .selection import CVConfig
from .solvers import SolverOptions
from .solvers.base import TWO_PARAMETER
from .synthetic import (
    GoldStandard,
    SimulationConfig,
    bundled_template,
    load_gold_standard,
    simulate_expression,
)

log = logging.getLogger("penalnet")

# command-line penalty names -> solver families
PENALTIES = {
    "lasso": "lasso",
    "ridge": "ridge",
    "enet": "elastic_net",
    "fused": "fused",
    "group": "group",
    "sgroup": "sparse_group",
    "paired": "paired_group",
    "hier": "hierarchical",
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _name_list(text: str) -> list[str]:
    return [x.strip() for x in text.split(",") if x.strip()]


def _solver_args(p):
    g = p.add_argument_group("solver")
    g.add_argument("--lambda", dest="lam", type=float, default=None,
                   help="fixed penalty; skips cross-validation (default: chosen by CV)")
    g.add_argument("--lambda2", type=float, default=None,
                   help="second penalty of enet/fused/sgroup when --lambda is fixed (default: 0)")
    g.add_argument("--tol", type=float, default=1e-6, help="solver tolerance (default: %(default)s)")
    g.add_argument("--max-iter", type=int, default=100_000, help="iteration cap (default: %(default)s)")
    g.add_argument("--rho", type=float, default=1.0, help="initial ADMM penalty (default: %(default)s)")
    g = p.add_argument_group("cross-validation")
    g.add_argument("--cv-folds", type=int, default=10, help="folds (default: %(default)s)")
    g.add_argument("--cv-grid", type=int, default=50, help="lambda grid size (default: %(default)s)")
    g.add_argument("--cv-min-ratio", type=float, default=1e-3,
                   help="smallest lambda as a fraction of the largest (default: %(default)s)")
    g = p.add_argument_group("grouping")
    g.add_argument("--groups-k", type=int, default=3, help="clusters for group penalties (default: %(default)s)")
    g.add_argument("--fused-k", type=int, default=10, help="clusters ordering the fused chain (default: %(default)s)")
    g.add_argument("--linkage", choices=LINKAGES, default="average", help="linkage (default: %(default)s)")
    g.add_argument("--global-grouping", action="store_true",
                   help="cluster all genes once instead of per response gene")
    g = p.add_argument_group("network")
    g.add_argument("--permutations", type=int, default=100,
                   help="permutations for the stability filter (default: %(default)s)")
    g.add_argument("--alpha", type=float, default=0.05, help="stability filter level (default: %(default)s)")
    g.add_argument("--edge-quantile", type=float, default=None,
                   help="keep edges above this quantile of |weight| (default: infer writes weights; "
                        "bench targets twice the true edge count)")
    g.add_argument("--threads", type=int, default=1, help="worker threads (default: %(default)s)")


def _common(p):
    p.add_argument("--seed", type=int, default=0, help="seed for every random choice (default: %(default)s)")
    p.add_argument("--config", type=Path, default=None,
                   help="key=value file of defaults; flags given on the command line win")
    p.add_argument("--out", type=Path, default=None, help="output file (default: standard output)")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to the error stream")


def build_parser() -> _Parser:
    parser = _Parser(prog="penalnet", description="Gene-network inference by node-wise penalized regression.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="simulate expression data from a gold-standard network",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("--gold", type=Path, default=None, help="gold standard TSV (default: bundled 15-gene network)")
    p.add_argument("--n", type=int, default=100, help="samples")
    p.add_argument("--noise-sd", type=float, default=1.0, help="noise standard deviation")
    p.add_argument("--weight-lo", type=float, default=0.3, help="smallest edge weight magnitude")
    p.add_argument("--weight-hi", type=float, default=0.9, help="largest edge weight magnitude")
    _common(p)

    p = sub.add_parser("infer", help="infer a network from an expression matrix")
    p.add_argument("--expr", type=Path, required=True, help="expression TSV, header row of gene names")
    p.add_argument("--transpose", action="store_true", help="rows of --expr are genes instead of samples")
    p.add_argument("--method", choices=sorted(METHODS), default=None,
                   help="benchmark method name, e.g. labnet = lasso with the permutation filter")
    p.add_argument("--penalty", choices=list(PENALTIES), default=None,
                   help="penalty family without permutation filter (default: lasso)")
    p.add_argument("--symmetrize", choices=SYMMETRIZE_RULES, default="none",
                   help="edge symmetrization after --edge-quantile (default: %(default)s)")
    _solver_args(p)
    _common(p)

    p = sub.add_parser("eval", help="score a predicted edge list against a gold standard")
    p.add_argument("--pred", type=Path, required=True, help="predicted edge list (2 or 3 columns)")
    p.add_argument("--gold", type=Path, required=True, help="gold standard TSV")
    p.add_argument("--name", default="pred", help="method label in the report (default: %(default)s)")
    _common(p)

    p = sub.add_parser("bench", help="benchmark methods on simulated subnetworks")
    p.add_argument("--sizes", type=_int_list, default=[15], help="comma-separated network sizes (default: 15)")
    p.add_argument("--methods", type=_name_list, default=list(DEFAULT_METHODS),
                   help=f"comma-separated methods from {','.join(METHODS)} (default: the nine standard ones)")
    p.add_argument("--n", type=int, default=100, help="samples per dataset (default: %(default)s)")
    p.add_argument("--template", default=None,
                   help="template gold standard: a TSV path or a bundled name (template15, template1500); "
                        "default picks the bundled one by size")
    p.add_argument("--no-timing", action="store_true", help="print '-' in the Time[sec] column")
    _solver_args(p)
    _common(p)
    return parser


def read_config(path: Path) -> dict[str, str]:
    """Flat ``key=value`` lines; ``#`` starts a comment. Keys use flag spelling."""
    out = {}
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        key, value = (x.strip() for x in line.split("=", 1))
        out[key.lstrip("-").replace("-", "_")] = value
    return out


def _apply_config(parser: _Parser, argv: list[str]) -> argparse.Namespace:
    args = parser.parse_args(argv)
    if args.config is None:
        return args
    if not args.config.is_file():
        raise UsageError(f"config file {args.config} not found")
    values = read_config(args.config)
    sub = parser._subparsers._group_actions[0].choices[args.command]
    actions = {a.dest: a for a in sub._actions}
    for key, value in values.items():
        dest = "lam" if key == "lambda" else key
        action = actions.get(dest)
        if action is None or dest in ("config", "help"):
            raise UsageError(f"{args.config}: unknown key {key!r} for {args.command}")
        if isinstance(action, (argparse._StoreTrueAction,)):
            value = value.lower() in ("1", "true", "yes", "on")
        sub.set_defaults(**{dest: value})
    # reparse so flags override file values and string defaults go through type conversion
    return parser.parse_args(argv)


def _write(text: str, out: Path | None):
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text, encoding="utf-8")


def _solver_opts(a) -> SolverOptions:
    return SolverOptions(tol=a.tol, max_iter=a.max_iter, rho=a.rho)


def _cv(a) -> CVConfig:
    return CVConfig(folds=a.cv_folds, grid_size=a.cv_grid, grid_min_ratio=a.cv_min_ratio, seed=a.seed)


def _grouping(a) -> GroupingConfig:
    return GroupingConfig(a.groups_k, a.fused_k, a.linkage, per_response=not a.global_grouping)


def _fixed(a, family: str):
    if a.lam is None:
        if a.lambda2 is not None:
            raise UsageError("--lambda2 needs --lambda")
        return None
    lam2 = a.lambda2 if a.lambda2 is not None else 0.0
    return (a.lam, lam2 if family in TWO_PARAMETER else None)


def cmd_simulate(a) -> int:
    gold = load_gold_standard(a.gold if a.gold is not None else bundled_template("template15"))
    cfg = SimulationConfig(a.n, a.noise_sd, (a.weight_lo, a.weight_hi), a.seed)
    m = simulate_expression(gold, cfg)
    save_expression(m, sys.stdout if a.out is None else a.out)
    return 0


def cmd_infer(a) -> int:
    if a.method is not None and a.penalty is not None:
        raise UsageError("give either --method or --penalty, not both")
    if a.method is not None:
        family, perm = METHODS[a.method]
    else:
        family, perm = PENALTIES[a.penalty or "lasso"], False
    if a.symmetrize != "none" and a.edge_quantile is None:
        raise UsageError("--symmetrize needs --edge-quantile")
    m = standardize(load_expression(a.expr, transpose=a.transpose))
    fixed = _fixed(a, family)
    opts = _solver_opts(a)
    if family == "paired_group":
        w = infer_paired(m, None if fixed is None else fixed[0], opts)
    elif perm:
        pcfg = PermutationConfig(a.permutations, a.alpha, a.seed)
        w = permutation_stability(m, family, _cv(a), pcfg, opts, _grouping(a), a.threads, fixed)
    else:
        w = infer_network(m, family, _cv(a), opts, _grouping(a), a.threads, fixed)
    for d in w.diagnostics:
        if not d.converged:
            log.warning("response %s: solver did not converge (KKT %.2e)", d.response, d.max_kkt_violation)
    out = sys.stdout if a.out is None else a.out
    if a.edge_quantile is None:
        write_weighted_edges(w, out)
    else:
        write_binary_edges(symmetrize(quantile_filter(w, a.edge_quantile), a.symmetrize), out)
    return 0


def cmd_eval(a) -> int:
    gold = load_gold_standard(a.gold)
    pred = read_edges(a.pred)
    # genes without predicted edges do not appear in an edge list
    pred = pred.align(gold.gene_names)
    report = compute_metrics(confusion(pred, gold))
    _write(format_reports([replace(report, method=a.name, size=gold.n_genes)], timing=False), a.out)
    return 0


def _template(name: str | None) -> GoldStandard | None:
    if name is None:
        return None
    if name in ("template15", "template1500"):
        return load_gold_standard(bundled_template(name))
    return load_gold_standard(Path(name))


def cmd_bench(a) -> int:
    unknown = [x for x in a.methods if x not in METHODS]
    if unknown:
        raise UsageError(f"unknown method {unknown[0]!r}; choose from {', '.join(METHODS)}")
    if not a.sizes:
        raise UsageError("--sizes is empty")
    lambdas = {}
    if a.lam is not None:
        lambdas = {x: _fixed(a, METHODS[x][0]) for x in a.methods}
    cfg = BenchmarkConfig(
        template=_template(a.template),
        n_samples=a.n,
        seed=a.seed,
        cv=_cv(a),
        permutation=PermutationConfig(a.permutations, a.alpha, a.seed),
        opts=_solver_opts(a),
        grouping=_grouping(a),
        edge_quantile=a.edge_quantile,
        threads=a.threads,
        lambdas=lambdas,
    )
    rows = run_benchmark(a.sizes, a.methods, cfg)
    _write(format_reports(rows, timing=not a.no_timing), a.out)
    return 0


COMMANDS = {"simulate": cmd_simulate, "infer": cmd_infer, "eval": cmd_eval, "bench": cmd_bench}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
        logging.basicConfig(
            level=logging.INFO if args.verbose else logging.WARNING,
            format="%(levelname)s: %(message)s",
            stream=sys.stderr,
        )
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, TypeError) as exc:
        if isinstance(exc, DataError):
            print(f"data error: {exc}", file=sys.stderr)
            return 2
        # invalid knob values rejected by the config dataclasses
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
