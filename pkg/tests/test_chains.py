import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lineising.chains import (ChainConfig, HalfEdgeState, draw_samples, enumerate_states, glauber_step,
                              half_edge_step, replica_rng, run_chain, sample_gibbs, transition_matrix)
from lineising.graph import cycle_graph, path_graph, star_graph
from lineising.oracle import empirical_distribution, exact_gibbs, tv_distance
from lineising.signatures import ModelParams, log_weight
from tests.test_graph import graphs


@given(graphs(6), st.floats(0, 2), st.floats(-1, 1), st.integers(0, 2**31))
@settings(max_examples=25)
def test_state_invariants_hold_along_runs(g, beta, nu, seed):
    if g.m < 2:
        return
    p = ModelParams(beta, nu)
    res = run_chain(g, p, ChainConfig("half_edge", steps=3000, seed=seed, thin=7))
    for s in res.final_states:
        s.validate(g, p)
        assert s.n_bad in (0, 2)
    assert res.violations == 0
    assert res.omega0_steps + res.omega2_steps == 3000


def test_single_steps():
    g = cycle_graph(4)
    p = ModelParams(1.0, 0.3)
    rng = replica_rng(5)
    s = HalfEdgeState.zeros(g, p)
    for _ in range(200):
        half_edge_step(g, p, s, rng)
        s.validate(g, p)
    s = HalfEdgeState.zeros(g, p)
    for _ in range(200):
        glauber_step(g, p, s, rng)
        assert s.is_consistent
    assert s.log_w == pytest.approx(log_weight(g, p, s.spins))


def test_glauber_refuses_inconsistent_start():
    g = path_graph(3)
    p = ModelParams(1.0)
    s = HalfEdgeState.from_spins(g, p, [1, 0, 1, 0])
    assert s.inconsistent_edges == frozenset({0, 1})
    with pytest.raises(ValueError):
        glauber_step(g, p, s, replica_rng(0))
    with pytest.raises(ValueError):
        s.edge_spins()


@pytest.mark.parametrize("kind", ["half_edge", "glauber"])
@pytest.mark.parametrize("g", [path_graph(3), cycle_graph(3), star_graph(3)])
def test_kernel_reversible_wrt_weights(kind, g):
    p = ModelParams(0.8, (0.3, -0.5, 1.0)[: g.m])
    states, P = transition_matrix(g, p, kind)
    w = np.exp([log_weight(g, p, np.array(s)) for s in states])
    pi = w / w.sum()
    assert np.allclose(P.sum(axis=1), 1, atol=1e-12)
    assert np.all(np.diag(P) >= 0.5 - 1e-12)
    F = pi[:, None] * P
    assert np.allclose(F, F.T, atol=1e-12)


def test_state_space_sizes():
    g = cycle_graph(3)
    assert len(enumerate_states(g, "glauber")) == 8
    # Omega_0: 8, Omega_2: C(3,2) * 4 * 2
    assert len(enumerate_states(g, "half_edge")) == 8 + 24


def test_seeded_runs_are_reproducible():
    g = cycle_graph(5)
    p = ModelParams(0.6)
    cfg = ChainConfig("half_edge", steps=5000, seed=11, thin=5, replicas=3)
    a, b = run_chain(g, p, cfg), run_chain(g, p, ChainConfig(**{**cfg.__dict__, "threads": 3}))
    assert np.array_equal(a.samples, b.samples) and a.to_dict() == b.to_dict()
    c = run_chain(g, p, ChainConfig(**{**cfg.__dict__, "seed": 12}))
    assert not np.array_equal(a.samples, c.samples)


def test_draw_samples_count_and_spacing():
    g = cycle_graph(4)
    res = draw_samples(g, ModelParams(0.5), 101, ChainConfig("half_edge", steps=0, seed=1, thin=8, replicas=2))
    assert res.samples.shape == (101, 4) and res.replica_sizes == [51, 50]


@pytest.mark.parametrize("kind", ["glauber", "half_edge"])
def test_samples_follow_gibbs(kind):
    g = cycle_graph(4)
    p = ModelParams(0.5, 0.4)
    res = draw_samples(g, p, 40_000, ChainConfig(kind, steps=0, seed=3, burn_in=500, thin=24))
    assert tv_distance(empirical_distribution(res.samples, 4), exact_gibbs(g, p)) < 0.02


def test_sample_gibbs_distribution():
    g = path_graph(3)
    p = ModelParams(1.0, -0.5)
    rng = replica_rng(9)
    xs = np.array([sample_gibbs(g, p, 60, rng) for _ in range(8000)])
    assert tv_distance(empirical_distribution(xs, 2), exact_gibbs(g, p)) < 0.03


def test_config_validation():
    with pytest.raises(ValueError):
        ChainConfig("metropolis")
    with pytest.raises(ValueError):
        ChainConfig(thin=0)
    with pytest.raises(ValueError):
        sample_gibbs(path_graph(3), ModelParams(1.0), 0, replica_rng(0))
