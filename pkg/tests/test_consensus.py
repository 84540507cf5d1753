import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from swarmest.consensus import (
    ConsensusParams,
    degroot_update,
    first_passage_time,
    precision_passage_time,
    precision_series,
    run_consensus_static,
    static_sweep,
    steady_state_solve,
    summarize_static,
    transition_system,
)
from swarmest.errors import ConfigError, DomainError
from swarmest.network import ProximityGraph, giant_component_size, random_geometric_graph

vals = st.floats(-1e3, 1e3, allow_nan=False)


def connected_rgg(n, seed, ratio=0.45):
    rng = np.random.default_rng(seed)
    while True:
        _, g = random_geometric_graph(n, ratio, rng)
        if giant_component_size(g) == n:
            return g


def test_update_examples():
    assert degroot_update(2.0, 2.0, [2.0, 2.0], 0.3) == pytest.approx(2.0)
    assert degroot_update(7.0, -3.0, [100.0], 1.0) == 7.0
    assert degroot_update(0.0, 1.0, [1.0, -1.0], 0.5) == pytest.approx(1 / 6)


@given(vals, vals, st.lists(vals, max_size=8), st.floats(0, 1))
def test_update_is_convex(z, s, nb, alpha):
    out = degroot_update(z, s, nb, alpha)
    pool = [z, s, *nb]
    assert min(pool) - 1e-9 <= out <= max(pool) + 1e-9


def test_transition_system_examples():
    a, b = transition_system(ProximityGraph(1), 0.5)
    assert a.tolist() == [[0.5]] and b.tolist() == [[0.5]]
    path = ProximityGraph(3, ((0, 1), (1, 2)))
    a, b = transition_system(path, 0.5)
    assert a[1].tolist() == pytest.approx([1 / 6, 0.5, 1 / 6])
    assert b[1, 1] == pytest.approx(1 / 6)


@given(st.integers(1, 30), st.integers(0, 10_000), st.floats(0, 1))
def test_transition_rows_are_convex(n, seed, alpha):
    _, g = random_geometric_graph(n, 0.4, np.random.default_rng(seed))
    a, b = transition_system(g, alpha)
    assert np.allclose(a.sum(axis=1) + np.diag(b), 1.0, atol=1e-12)


def test_transition_matches_scalar_update():
    g = connected_rgg(12, 3)
    rng = np.random.default_rng(1)
    z, s = rng.normal(size=12), rng.normal(size=12)
    a, b = transition_system(g, 0.4)
    nb = g.neighbors()
    scalar = [degroot_update(z[i], s[i], z[nb[i]], 0.4) for i in range(12)]
    assert np.allclose(a @ z + b @ s, scalar, atol=1e-12)


def test_complete_graph_closed_form():
    z = steady_state_solve(ProximityGraph.complete(3), [0.0, 3.0, 6.0], 0.5)
    assert z == pytest.approx([2.25, 3.0, 3.75], abs=1e-12)


def test_constant_measurements_fixed_point():
    g = connected_rgg(15, 2)
    assert np.allclose(steady_state_solve(g, np.full(15, 4.5), 0.2), 4.5)


def test_fixed_point_independent_of_alpha():
    g = connected_rgg(20, 8)
    s = np.random.default_rng(0).normal(size=20)
    sols = [steady_state_solve(g, s, a) for a in (0.0, 0.3, 0.9)]
    for z in sols[1:]:
        assert np.max(np.abs(z - sols[0])) < 1e-10


def test_alpha_one_has_no_fixed_point():
    with pytest.raises(DomainError):
        steady_state_solve(ProximityGraph.complete(2), [0.0, 1.0], 1.0)


def test_iteration_matches_solve():
    g = connected_rgg(10, 4)
    s = np.random.default_rng(4).uniform(0, 5, 10)
    hist = run_consensus_static(g, s, ConsensusParams(0.5, 10_000))
    assert np.max(np.abs(hist[-1] - steady_state_solve(g, s, 0.5))) < 1e-8


def test_static_run_shapes_and_trivia():
    g = ProximityGraph(4)
    s = np.array([1.0, 2.0, 3.0, 4.0])
    assert run_consensus_static(g, s, ConsensusParams(t_comm=0)).shape == (1, 4)
    hist = run_consensus_static(g, s, ConsensusParams(alpha=0.0, t_comm=5), initial=np.zeros(4))
    assert np.array_equal(hist[1], s) and np.array_equal(hist[-1], s)


def test_precision_contracts_on_connected_graph():
    g = connected_rgg(30, 6)
    s = np.random.default_rng(6).uniform(0, 1, 30)
    p = precision_series(run_consensus_static(g, s, ConsensusParams()))
    assert p[-1] <= p[0]


def test_first_passage_examples():
    assert first_passage_time([1e-5, 1.0], 1e-4) == 0
    assert first_passage_time([1, 0.5, 1e-5, 1e-6], 1e-4) == 2
    assert first_passage_time([1.0, 1.0], 1e-4) is None
    with pytest.raises(DomainError):
        first_passage_time([], 1e-4)


def test_passage_band_default_and_raw():
    p = [1.0, 0.30005, 0.3, 0.3]
    assert precision_passage_time(p, 1e-3) == 1
    assert precision_passage_time(p, 1e-3, raw=True) is None


def test_params_validated():
    with pytest.raises(ConfigError, match="alpha"):
        ConsensusParams(alpha=1.5)
    with pytest.raises(ConfigError, match="delta"):
        ConsensusParams(delta=0)


def test_sweep_independent_of_workers():
    a = static_sweep(12, [0.2, 0.5], 3, ConsensusParams(t_comm=20), seed=5)
    b = static_sweep(12, [0.2, 0.5], 3, ConsensusParams(t_comm=20), seed=5, workers=2)
    assert a == b
    row = summarize_static(0.5, a[1])
    assert set(row) == {"range_ratio", "mean_degree", "steady_E_P", "passage_time", "lambda2", "connected_fraction"}
