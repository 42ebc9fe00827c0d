import numpy as np
import pytest
from scipy.sparse.csgraph import connected_components

from itad.counting import Dirac, DomainError, Poisson
from itad.kernels import Decentral, Subcentral
from itad.graphsim import (MAX_DENSE_POINTS, PointSystem, SimulationError, activation_process,
                           count_active, count_deactivations, induce, replicate_seeds,
                           run_replicates, sample_degree_field, sample_graph,
                           simulate_transduction, streams, summarize)


def naive_transduction(adj, active, l):
    a = active.astype(bool).copy()
    counts = [int(a.sum())]
    while True:
        hits = adj.astype(np.int64) @ a.astype(np.int64)
        new = a | (hits >= l)
        if np.array_equal(new, a):
            return a, counts
        a = new
        counts.append(int(a.sum()))


def test_complete_and_empty_graphs():
    full = sample_graph(Dirac(20), Decentral(1.0), seed=1)
    assert full.adjacency.all() and np.all(full.degrees() == 20)
    empty = sample_graph(Dirac(20), Decentral(0.0), seed=1)
    assert not empty.adjacency.any()
    assert count_active(full, 20) == 20 and count_active(empty, 1) == 0


def test_adjacency_symmetric_with_upper_edge_list():
    s = sample_graph(Poisson(30.0), Subcentral(3.0057), seed=7)
    assert np.array_equal(s.adjacency, s.adjacency.T)
    e = s.edges()
    assert np.all(e[:, 0] <= e[:, 1])
    assert e.shape[0] == np.count_nonzero(np.triu(s.adjacency))


def test_edge_frequency():
    s = sample_graph(Dirac(100), Decentral(0.3), seed=99)
    n_pairs = 100 * 101 // 2
    n_edges = s.edges().shape[0]
    assert abs(n_edges - 0.3 * n_pairs) <= 5 * np.sqrt(n_pairs * 0.3 * 0.7)


def test_same_seed_same_graph():
    a = sample_graph(Poisson(50.0), Subcentral(3.0057), seed=2024, horizon=1.0)
    b = sample_graph(Poisson(50.0), Subcentral(3.0057), seed=2024, horizon=1.0)
    assert np.array_equal(a.locations, b.locations)
    assert np.array_equal(a.adjacency, b.adjacency)
    assert np.array_equal(a.toas, b.toas)
    c = sample_graph(Poisson(50.0), Subcentral(3.0057), seed=2025)
    assert not np.array_equal(a.locations[:3], c.locations[:3])


def test_streams_are_independent_and_stable():
    g1, g2 = streams(5)[:2]
    assert g1.random() != g2.random()
    assert np.array_equal(replicate_seeds(5, 4), replicate_seeds(5, 4))
    assert replicate_seeds(5, 4).dtype == np.uint64


@pytest.mark.parametrize("seed", range(8))
def test_unit_threshold_spreads_over_components(seed):
    s = sample_graph(Poisson(40.0), Decentral(0.04), seed=seed)
    induce(s, 3)
    init = s.labels.astype(bool).copy()
    simulate_transduction(s, 1)
    _, comp = connected_components(s.adjacency, directed=False)
    reached = np.isin(comp, comp[init])
    assert np.array_equal(s.labels.astype(bool), reached)


@pytest.mark.parametrize("l", [1, 2, 3, 5])
def test_transduction_matches_naive_loop(l):
    s = sample_graph(Poisson(60.0), Subcentral(3.0057), seed=31 + l)
    labels = induce(s, 6).copy()
    counts = simulate_transduction(s, l)
    final, ref_counts = naive_transduction(s.adjacency, labels, l)
    assert counts == ref_counts
    assert np.array_equal(s.labels.astype(bool), final)
    assert all(b >= a for a, b in zip(counts, counts[1:]))
    # terminal state is a fixed point
    assert simulate_transduction(s, l) == [counts[-1]]


def test_transduction_requires_labels():
    s = sample_graph(Dirac(5), Decentral(0.5), seed=0)
    with pytest.raises(DomainError):
        simulate_transduction(s, 1)
    with pytest.raises(DomainError):
        simulate_transduction(s, 0, k=1)
    with pytest.raises(DomainError):
        count_active(s, 0)


def test_activation_process():
    s = sample_graph(Poisson(50.0), Decentral(0.1), seed=11, horizon=2.0)
    grid = np.linspace(0.0, 2.0, 41)
    v = activation_process(s, 3, np.concatenate([[-1.0], grid]))
    assert v[0] == 0
    assert v[-1] == count_active(s, 3)
    assert np.all(np.diff(v) >= 0)
    with pytest.raises(DomainError):
        activation_process(sample_graph(Dirac(3), Decentral(0.5), seed=0), 1, grid)


def test_deactivation_counts():
    counts = []
    for seed in range(300):
        s = PointSystem(np.zeros(200), np.zeros((200, 200), bool), seed,
                        labels=np.ones(200, np.uint8))
        counts.append(count_deactivations(s, 0.3))
    assert abs(np.mean(counts) - 60.0) <= 5 * np.sqrt(42.0 / 300)
    s = PointSystem(np.zeros(4), np.zeros((4, 4), bool), 0, labels=np.zeros(4, np.uint8))
    assert count_deactivations(s, 1.0) == 0
    with pytest.raises(DomainError):
        count_deactivations(s, 1.5)


def test_degree_field_moments():
    d = sample_degree_field(Poisson(50.0), Decentral(0.1), [0.2, 0.7], 20_000, seed=3)
    assert abs(d.mean() - 5.0) <= 0.1
    assert np.corrcoef(d.T)[0, 1] == pytest.approx(0.1, abs=0.03)
    d0 = sample_degree_field(Dirac(50), Decentral(0.1), [0.2, 0.7], 20_000, seed=3)
    assert abs(np.corrcoef(d0.T)[0, 1]) <= 0.03


def test_dense_limit():
    with pytest.raises(SimulationError):
        sample_graph(Dirac(MAX_DENSE_POINTS + 1), Decentral(0.1), seed=0)


def test_replicates_deterministic_and_consistent():
    a = run_replicates(Poisson(50.0), Decentral(0.1), 8, 20, master_seed=77, l=2)
    b = run_replicates(Poisson(50.0), Decentral(0.1), 8, 20, master_seed=77, l=2)
    assert a == b
    for row in a:
        s = sample_graph(Poisson(50.0), Decentral(0.1), row.seed)
        assert row.K == s.K and row.V_k == count_active(s, 8)
        assert row.terminal >= row.V_k


def test_summarize():
    out = summarize([1.0, 2.0, 3.0, 4.0])
    assert out["mean"] == 2.5 and out["variance"] == pytest.approx(5 / 3)
    assert out["stderr"] == pytest.approx(np.sqrt(5 / 12))
