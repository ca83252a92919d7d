import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from penalnet.expression import DataError
from penalnet.synthetic import (
    GoldStandard,
    SimulationConfig,
    bundled_template,
    induced_subnetwork,
    load_gold_standard,
    sample_subnetwork,
    save_gold_standard,
    scale_free_template,
    simulate_expression,
)


def write(tmp_path, text):
    path = tmp_path / "gold.tsv"
    path.write_text(text)
    return path


def test_load_examples(tmp_path):
    g = load_gold_standard(write(tmp_path, "G1\tG2\t1\n"))
    assert g.gene_names == ("G1", "G2") and g.edges.tolist() == [[False, True], [False, False]]
    with pytest.raises(DataError, match="self-edge"):
        load_gold_standard(write(tmp_path, "G1\tG1\t1\n"))
    with pytest.raises(DataError, match="malformed"):
        load_gold_standard(write(tmp_path, "G1\tG2\n"))
    with pytest.raises(DataError, match="contradictory"):
        load_gold_standard(write(tmp_path, "G1\tG2\t1\nG1\tG2\t0\n"))


def test_bundled_template_has_thirteen_edges():
    g = load_gold_standard(bundled_template("template15"))
    assert g.n_genes == 15 and g.n_edges == 13


def small_graphs():
    return st.integers(3, 12).flatmap(
        lambda p: st.lists(st.tuples(st.integers(0, p - 1), st.integers(0, p - 1)), max_size=3 * p).map(
            lambda pairs: (p, pairs)
        )
    )


def to_gold(p, pairs):
    E = np.zeros((p, p), dtype=bool)
    for i, j in pairs:
        if i != j:
            E[i, j] = True
    return GoldStandard(E, tuple(f"G{i}" for i in range(p)))


@settings(max_examples=40, deadline=None)
@given(small_graphs())
def test_save_load_round_trip(tmp_path_factory, graph):
    g = to_gold(*graph)
    path = tmp_path_factory.mktemp("g") / "g.tsv"
    save_gold_standard(g, path)
    back = load_gold_standard(path)
    assert back.gene_names == g.gene_names and np.array_equal(back.edges, g.edges)


@settings(max_examples=40, deadline=None)
@given(small_graphs(), st.integers(0, 2**32), st.data())
def test_sample_is_induced_subgraph(graph, seed, data):
    g = to_gold(*graph)
    if not (g.edges | g.edges.T).any(axis=1).all():
        # isolated vertices are fine: the walk restarts
        pass
    size = data.draw(st.integers(2, g.n_genes))
    sub = sample_subnetwork(g, size, seed)
    idx = [g.gene_names.index(x) for x in sub.gene_names]
    assert len(idx) == size and idx == sorted(idx)
    for a, i in enumerate(idx):
        for b, j in enumerate(idx):
            assert sub.edges[a, b] == g.edges[i, j]


def test_full_size_sample_is_template():
    g = load_gold_standard(bundled_template("template15"))
    sub = sample_subnetwork(g, 15, seed=3)
    assert sub.gene_names == g.gene_names and np.array_equal(sub.edges, g.edges)


def test_size_two_keeps_edge_iff_both_sampled():
    g = GoldStandard(np.array([[0, 1, 0], [0, 0, 0], [0, 0, 0]], dtype=bool), ("A", "B", "C"))
    for seed in range(20):
        sub = sample_subnetwork(g, 2, seed)
        both = set(sub.gene_names) == {"A", "B"}
        assert sub.edges.any() == both


def test_sampling_errors():
    g = GoldStandard(np.zeros((3, 3), dtype=bool), ("A", "B", "C"))
    with pytest.raises(ValueError):
        sample_subnetwork(g, 4, 0)
    with pytest.raises(ValueError):
        sample_subnetwork(g, 1, 0)
    # isolated vertices make the walk restart on every step
    with pytest.raises(DataError):
        sample_subnetwork(g, 3, 0, max_restarts=1)


def test_large_sample_density_tracks_template():
    template = load_gold_standard(bundled_template("template1500"))
    base = template.n_edges / template.n_genes
    for seed in range(20):
        sub = sample_subnetwork(template, 200, seed)
        ratio = (sub.n_edges / sub.n_genes) / base
        assert 1 / 3 <= ratio <= 3


def test_bundled_large_template_matches_generator():
    g = load_gold_standard(bundled_template("template1500"))
    regen = scale_free_template(1500, 150, 1800, seed=1)
    def named(x):
        return {(x.gene_names[i], x.gene_names[j]) for i, j in zip(*np.nonzero(x.edges))}

    assert named(g) == named(regen) and set(g.gene_names) == set(regen.gene_names)


def test_empty_network_gives_uncorrelated_columns():
    g = GoldStandard(np.zeros((4, 4), dtype=bool), tuple("abcd"))
    X = simulate_expression(g, SimulationConfig(n_samples=10_000, seed=1)).values
    C = np.corrcoef(X.T)
    assert np.abs(C - np.eye(4)).max() <= 0.1


def test_single_edge_correlation():
    g = GoldStandard(np.array([[0, 1], [0, 0]], dtype=bool), ("A", "B"))
    cfg = SimulationConfig(n_samples=10_000, weight_range=(0.8, 0.8), seed=2)
    X = simulate_expression(g, cfg).values
    assert abs(np.corrcoef(X.T)[0, 1]) == pytest.approx(0.8 / np.sqrt(1.64), abs=0.03)


def test_simulation_deterministic_and_finite():
    g = load_gold_standard(bundled_template("template15"))
    a = simulate_expression(g, SimulationConfig(seed=5))
    b = simulate_expression(g, SimulationConfig(seed=5))
    assert np.array_equal(a.values, b.values) and np.all(np.isfinite(a.values))


def test_spectral_radius_cap():
    # a 2-cycle with weights 0.9 has spectral radius 0.9 exactly; a 3-cycle of 1.0 must be scaled
    E = np.array([[0, 1, 0], [0, 0, 1], [1, 0, 0]], dtype=bool)
    g = GoldStandard(E, tuple("abc"))
    X = simulate_expression(g, SimulationConfig(n_samples=50, weight_range=(5.0, 5.0), seed=0)).values
    assert np.all(np.isfinite(X))


def test_config_validation():
    for kw in ({"n_samples": 1}, {"noise_sd": 0}, {"weight_range": (0.0, 1.0)}, {"weight_range": (2.0, 1.0)}):
        with pytest.raises(ValueError):
            SimulationConfig(**kw)
