"""Gold-standard networks and a linear structural-equation expression simulator."""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .expression import DataError, ExpressionMatrix


@dataclass(frozen=True)
class GoldStandard:
    """Directed reference network; ``edges[i, j]`` means gene ``i`` regulates gene ``j``."""

    edges: np.ndarray
    gene_names: tuple[str, ...]

    def __post_init__(self):
        edges = np.array(self.edges, dtype=bool, copy=True)
        p = len(self.gene_names)
        if edges.shape != (p, p):
            raise DataError(f"edge matrix shape {edges.shape} does not match {p} genes")
        if edges.diagonal().any():
            raise DataError("gold standard has a self-edge")
        if len(set(self.gene_names)) != p:
            raise DataError("duplicate gene names in gold standard")
        edges.setflags(write=False)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "gene_names", tuple(self.gene_names))

    @property
    def n_genes(self) -> int:
        return len(self.gene_names)

    @property
    def n_edges(self) -> int:
        return int(self.edges.sum())


@dataclass(frozen=True)
class SimulationConfig:
    n_samples: int = 100
    noise_sd: float = 1.0
    weight_range: tuple[float, float] = (0.3, 0.9)
    seed: int = 0
    max_spectral_radius: float = 0.9

    def __post_init__(self):
        lo, hi = self.weight_range
        if self.n_samples < 2:
            raise ValueError("need at least 2 samples")
        if self.noise_sd <= 0:
            raise ValueError("noise_sd must be positive")
        if not 0 < lo <= hi:
            raise ValueError("weight range must satisfy 0 < lo <= hi")
        if not 0 < self.max_spectral_radius < 1:
            raise ValueError("max_spectral_radius must lie in (0, 1)")


def load_gold_standard(path) -> GoldStandard:
    """Parse ``source<TAB>target<TAB>flag`` lines (flag 0 or 1).

    Genes are ordered by first appearance. Pairs flagged 0 only register
    their genes.
    """
    path = Path(path)
    names: dict[str, int] = {}
    flags: dict[tuple[str, str], int] = {}
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\r\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 3 or parts[2].strip() not in ("0", "1"):
                raise DataError(f"{path}: malformed line {lineno}: {line!r}")
            src, dst, flag = parts[0].strip(), parts[1].strip(), int(parts[2])
            if not src or not dst:
                raise DataError(f"{path}: empty gene name on line {lineno}")
            if src == dst:
                raise DataError(f"{path}: self-edge {src} on line {lineno}")
            if flags.get((src, dst), flag) != flag:
                raise DataError(f"{path}: contradictory flags for {src}->{dst} on line {lineno}")
            flags[(src, dst)] = flag
            names.setdefault(src, len(names))
            names.setdefault(dst, len(names))
    if not names:
        raise DataError(f"{path}: no edges")
    edges = np.zeros((len(names), len(names)), dtype=bool)
    for (src, dst), flag in flags.items():
        if flag:
            edges[names[src], names[dst]] = True
    return GoldStandard(edges, tuple(names))


def save_gold_standard(g: GoldStandard, path, include_absent: bool = True) -> None:
    """Write every ordered pair with its flag (or only present edges)."""
    with Path(path).open("w", encoding="utf-8") as fh:
        for i, src in enumerate(g.gene_names):
            for j, dst in enumerate(g.gene_names):
                if i == j or not (include_absent or g.edges[i, j]):
                    continue
                fh.write(f"{src}\t{dst}\t{int(g.edges[i, j])}\n")


def induced_subnetwork(g: GoldStandard, vertices) -> GoldStandard:
    idx = np.asarray(vertices)
    return GoldStandard(g.edges[np.ix_(idx, idx)], tuple(g.gene_names[i] for i in idx))


def sample_subnetwork(template: GoldStandard, size: int, seed: int, max_restarts: int = 10_000) -> GoldStandard:
    """Random-walk vertex sample of ``size`` genes and its induced subgraph.

    The walk runs on the undirected skeleton. It restarts from a uniformly
    random vertex when it reaches a vertex without neighbours or stops finding
    new vertices for ``4 * size`` steps. Sampled genes keep template order.
    """
    p = template.n_genes
    if not 2 <= size <= p:
        raise ValueError(f"subnetwork size {size} outside [2, {p}]")
    rng = np.random.default_rng(seed)
    skeleton = template.edges | template.edges.T
    neighbours = [np.flatnonzero(row) for row in skeleton]
    seen = np.zeros(p, dtype=bool)
    count = 0
    restarts = 0
    current = int(rng.integers(p))
    stale = 0
    while True:
        if not seen[current]:
            seen[current] = True
            count += 1
            stale = 0
            if count == size:
                break
        else:
            stale += 1
        nb = neighbours[current]
        if len(nb) == 0 or stale > 4 * size:
            restarts += 1
            if restarts > max_restarts:
                raise DataError(f"could not collect {size} vertices after {max_restarts} restarts")
            current = int(rng.integers(p))
            stale = 0
        else:
            current = int(nb[rng.integers(len(nb))])
    return induced_subnetwork(template, np.flatnonzero(seen))


def simulate_expression(g: GoldStandard, cfg: SimulationConfig) -> ExpressionMatrix:
    """Sample ``cfg.n_samples`` rows of ``x = (I - W')^-1 eps``.

    ``W[i, j]`` is a weight drawn uniformly from ``+-[lo, hi]`` on each gold
    edge ``i -> j``; ``W`` is scaled down when its spectral radius exceeds
    ``cfg.max_spectral_radius``. Noise is i.i.d. ``N(0, noise_sd^2)``.
    """
    rng = np.random.default_rng(cfg.seed)
    p = g.n_genes
    lo, hi = cfg.weight_range
    src, dst = np.nonzero(g.edges)
    W = np.zeros((p, p))
    mags = rng.uniform(lo, hi, size=len(src))
    signs = rng.choice([-1.0, 1.0], size=len(src))
    W[src, dst] = mags * signs
    radius = np.abs(np.linalg.eigvals(W)).max(initial=0.0)
    if radius > cfg.max_spectral_radius:
        W *= cfg.max_spectral_radius / radius
    eps = rng.normal(0.0, cfg.noise_sd, size=(cfg.n_samples, p))
    # rows: x' = eps' (I - W)^-1
    X = np.linalg.solve((np.eye(p) - W).T, eps.T).T
    return ExpressionMatrix(X, g.gene_names)


def scale_free_template(n_genes: int, n_regulators: int, n_edges: int, seed: int) -> GoldStandard:
    """Regulator-to-target network with a heavy-tailed out-degree.

    Regulators are the first ``n_regulators`` genes; edges are drawn with
    probability proportional to a Zipf-like regulator weight, so a few hubs
    control many targets, as in bacterial transcription networks.
    """
    rng = np.random.default_rng(seed)
    weight = 1.0 / np.arange(1, n_regulators + 1) ** 0.9
    weight /= weight.sum()
    edges = np.zeros((n_genes, n_genes), dtype=bool)
    # every gene gets at least one regulator so the skeleton has no isolated vertex
    for t in range(n_genes):
        r = int(rng.choice(n_regulators, p=weight))
        if r == t:
            r = (r + 1) % n_regulators
        edges[r, t] = True
    while edges.sum() < n_edges:
        r = int(rng.choice(n_regulators, p=weight))
        t = int(rng.integers(n_genes))
        if r != t:
            edges[r, t] = True
    width = len(str(n_genes))
    names = tuple(f"G{i + 1:0{width}d}" for i in range(n_genes))
    return GoldStandard(edges, names)


def bundled_template(name: str = "template15") -> Path:
    """Path of a gold standard shipped with the package (``template15`` or ``template1500``)."""
    return Path(str(resources.files("penalnet") / "data" / f"{name}.tsv"))
