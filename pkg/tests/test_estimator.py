import json
import math

import numpy as np
import pytest

from lineising.estimator import (AnnealSchedule, base_partition, batch_stderr, estimate_ratio, estimate_Z,
                                 omega_ratio_bound, measure_omega_ratio, samples_for)
from lineising.chains import replica_rng
from lineising.graph import cycle_graph, line_graph, path_graph, star_graph
from lineising.oracle import exact_summary, exact_Z_vertex_model
from lineising.signatures import ModelParams


def test_base_partition():
    assert base_partition(cycle_graph(4), 0.0) == pytest.approx(4 * math.log(2))
    assert base_partition(path_graph(3), (1.0, -1.0)) == pytest.approx(math.log1p(math.e) + math.log1p(math.exp(-1)))


def test_schedule():
    g = cycle_graph(6)  # |E(L)| = 6
    s = AnnealSchedule.uniform(g, 1.0)
    assert s.r == 6 and s.betas[-1] == 1.0
    assert np.all(np.diff(s.betas) <= s.step_bound + 1e-15)
    assert AnnealSchedule.uniform(g, 0.0).r == 0
    with pytest.raises(ValueError):
        AnnealSchedule((0.0, 0.5), 0.1)
    with pytest.raises(ValueError):
        AnnealSchedule((0.1,), 1.0)


def test_beta_zero_is_exact():
    g = star_graph(3)
    rep = estimate_Z(g, ModelParams(0.0, 0.7), seed=1)
    assert rep.log_Z == base_partition(g, 0.7) and rep.ratio_means == []


def test_rejects_ferromagnetic_by_default():
    with pytest.raises(ValueError):
        estimate_Z(cycle_graph(4), ModelParams(-0.2), seed=0)
    rep = estimate_Z(cycle_graph(4), ModelParams(-0.2), seed=0, allow_ferromagnetic=True)
    assert rep.log_Z == pytest.approx(exact_Z_vertex_model(line_graph(cycle_graph(4)), -0.2), abs=0.05)


def test_single_ratio():
    g = cycle_graph(4)
    p = ModelParams(0.25)
    exact = exact_Z_vertex_model(line_graph(g), 0.5) - exact_Z_vertex_model(line_graph(g), 0.25)
    mean, se = estimate_ratio(g, p, 0.25, 20_000, replica_rng(2))
    assert abs(math.log(mean) - exact) < 4 * se / mean + 1e-3


@pytest.mark.parametrize("g,beta,nu", [(cycle_graph(5), 0.8, -0.3), (star_graph(4), 0.5, 0.5), (path_graph(5), 2.0, 0.0)])
def test_estimate_close_to_exact(g, beta, nu):
    rep = estimate_Z(g, ModelParams(beta, nu), 0.1, seed=4)
    exact = exact_Z_vertex_model(line_graph(g), beta, nu)
    assert abs(rep.log_Z - exact) <= max(0.1, 4 * rep.log_Z_stderr)


def test_report_json_stable_and_seeded():
    g = cycle_graph(5)
    p = ModelParams(0.5)
    a = estimate_Z(g, p, 0.3, seed=7, replicas=2, threads=1)
    b = estimate_Z(g, p, 0.3, seed=7, replicas=2, threads=2)
    assert a.to_json() == b.to_json()
    assert a == b
    assert "wall_time" not in json.loads(a.to_json())
    assert "wall_time" in a.to_dict(timing=True)
    assert estimate_Z(g, p, 0.3, seed=8).to_json() != a.to_json()


def test_samples_for_and_stderr():
    assert samples_for(6, 0.1) == 2400
    assert batch_stderr(np.ones(100)) == 0.0
    x = np.random.default_rng(0).normal(size=40_000)
    assert batch_stderr(x) == pytest.approx(1 / 200, rel=0.4)


def test_omega_ratio_measurement():
    g = star_graph(3)
    p = ModelParams(0.5, 1.0)
    exact = exact_summary(g, p).omega_ratio
    est = measure_omega_ratio(g, p, 400_000, seed=3)
    assert abs(est.ratio - exact) < 4 * est.stderr
    assert exact <= omega_ratio_bound(g, p) == est.bound(g, p)


@pytest.mark.parametrize("g", [cycle_graph(4), star_graph(4), path_graph(5), cycle_graph(6)])
def test_telescoping_with_exact_ratios(g):
    nu = 0.3
    lg = line_graph(g)
    sched = AnnealSchedule.uniform(g, 1.2)
    logs = [exact_Z_vertex_model(lg, b, nu) for b in sched.betas]
    assert base_partition(g, nu) == pytest.approx(logs[0], abs=1e-12)
    assert base_partition(g, nu) + sum(np.diff(logs)) == pytest.approx(exact_Z_vertex_model(lg, 1.2, nu), abs=1e-9)
    assert np.all(np.diff(logs) >= 0)


def test_sampled_terms_at_least_one():
    rep = estimate_Z(cycle_graph(5), ModelParams(0.7, 0.0), 0.3, seed=3)
    assert min(rep.ratio_means) >= 1.0
