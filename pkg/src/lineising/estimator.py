"""Partition function of the Ising model on L(G) by annealing in beta.

``Z_beta = Z_0 * prod_i Z_{beta_i} / Z_{beta_{i-1}}``; each ratio is the
mean of ``exp((beta_i - beta_{i-1}) * D(sigma))`` under the Gibbs law at
``beta_{i-1}``, where ``D`` counts bichromatic edges of the line graph.
"""
from __future__ import annotations

import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .chains import HalfEdgeState, _Runner, collect, replica_rng
from .graph import Graph
from .signatures import ModelParams


def base_partition(g: Graph, nu=0.0) -> float:
    """log Z at beta = 0: independent spins, ``sum_e log(1 + e^{nu_e})``."""
    fields = ModelParams(0.0, nu).edge_fields(g.m)
    return float(np.sum(np.logaddexp(0.0, fields)))


@dataclass(frozen=True)
class AnnealSchedule:
    betas: tuple[float, ...]
    step_bound: float

    def __post_init__(self):
        b = self.betas
        if not b or b[0] != 0.0:
            raise ValueError("schedule must start at beta = 0")
        steps = np.diff(b) * (1.0 if b[-1] >= 0 else -1.0)
        if np.any(steps <= 0):
            raise ValueError("schedule must move strictly away from 0")
        if np.any(steps > self.step_bound * (1 + 1e-12)):
            raise ValueError("schedule step exceeds the bound")

    @property
    def r(self) -> int:
        return len(self.betas) - 1

    @classmethod
    def uniform(cls, g: Graph, beta: float) -> "AnnealSchedule":
        """Equal steps no larger than ``1 / |E(L(G))|``."""
        e_lg = max(1, g.line_graph_edge_count())
        bound = 1.0 / e_lg
        r = math.ceil(abs(beta) * e_lg - 1e-12) if beta else 0
        return cls(tuple(beta * i / r for i in range(r + 1)) if r else (0.0,), bound)


def batch_stderr(x: np.ndarray, n_batches: int = 20) -> float:
    """Standard error of the mean from non-overlapping batch means."""
    x = np.asarray(x, dtype=float)
    n = len(x)
    if n < 2:
        return 0.0
    if n < 2 * n_batches:
        return float(x.std(ddof=1) / math.sqrt(n))
    size = n // n_batches
    means = x[: size * n_batches].reshape(n_batches, size).mean(axis=1)
    return float(means.std(ddof=1) / math.sqrt(n_batches))


def ratio_terms(bichromatic: np.ndarray, delta_beta: float) -> np.ndarray:
    return np.exp(delta_beta * np.asarray(bichromatic, dtype=float))


def estimate_ratio(g: Graph, params: ModelParams, delta_beta: float, samples: int,
                   rng: np.random.Generator, chain: str = "glauber", burn_in: int | None = None,
                   spacing: int | None = None, state: HalfEdgeState | None = None):
    """Estimate ``Z_{beta + delta_beta} / Z_beta`` from ``samples`` Gibbs samples at ``params.beta``.

    Returns ``(mean, stderr)``.
    """
    if delta_beta == 0:
        return 1.0, 0.0
    runner = _Runner(g, params, chain, state or HalfEdgeState.zeros(g, params), rng)
    _, D = collect(runner, samples, default_burn_in(g) if burn_in is None else burn_in, spacing or g.m)
    terms = ratio_terms(D, delta_beta)
    return float(terms.mean()), batch_stderr(terms)


def default_burn_in(g: Graph) -> int:
    return 8 * g.m ** 2 * max(1, g.line_graph_edge_count())


@dataclass
class EstimateReport:
    log_Z: float
    log_Z_base: float
    betas: list
    ratio_means: list
    ratio_stderrs: list
    samples_per_level: int
    total_steps: int
    seed: int
    replicas: int
    chain: str
    wall_time: float = field(default=0.0, compare=False)

    @property
    def log_ratios(self) -> list:
        return [math.log(r) for r in self.ratio_means]

    @property
    def log_Z_stderr(self) -> float:
        return math.sqrt(sum((s / r) ** 2 for s, r in zip(self.ratio_stderrs, self.ratio_means)))

    def to_dict(self, timing: bool = False) -> dict:
        d = asdict(self)
        d["log_Z_stderr"] = self.log_Z_stderr
        if not timing:
            d.pop("wall_time")
        return d

    def to_json(self, timing: bool = False) -> str:
        return json.dumps(self.to_dict(timing), sort_keys=True)


def samples_for(r: int, epsilon: float, constant: float = 4.0) -> int:
    """Samples per level, ``constant * r / epsilon^2``."""
    return max(1, math.ceil(constant * max(r, 1) / epsilon ** 2))


def estimate_Z(g: Graph, params: ModelParams, epsilon: float = 0.1, seed: int = 0, chain: str = "glauber",
               samples: int | None = None, burn_in: int | None = None, spacing: int | None = None,
               replicas: int = 1, threads: int = 1, allow_ferromagnetic: bool = False) -> EstimateReport:
    """Telescoping-product estimate of ``log Z_{beta,nu}(L(g))``.

    Each replica keeps one chain alive across levels: it is burned in at
    every new beta and then sampled every ``spacing`` steps.  Replica r at
    level i draws from the stream (seed, r, i), so the report depends only
    on the inputs, the seed and the replica count.
    """
    t0 = time.perf_counter()
    if params.beta < 0 and not allow_ferromagnetic:
        raise ValueError("beta < 0 is outside the antiferromagnetic regime; pass allow_ferromagnetic=True")
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if replicas < 1 or threads < 1:
        raise ValueError("replicas and threads must be positive")
    base = base_partition(g, params.nu)
    sched = AnnealSchedule.uniform(g, params.beta)
    r = sched.r
    n = samples if samples is not None else samples_for(r, epsilon)
    burn = default_burn_in(g) if burn_in is None else burn_in
    spacing = spacing or g.m
    if r == 0:
        return EstimateReport(base, base, list(sched.betas), [], [], n, 0, seed, replicas, chain,
                              time.perf_counter() - t0)
    per_rep = [n // replicas + (1 if i < n % replicas else 0) for i in range(replicas)]

    def run(rep):
        state = HalfEdgeState.zeros(g, params)
        steps = 0
        Ds = []
        for i in range(r):
            p = params.with_beta(sched.betas[i])
            state.log_w = HalfEdgeState.from_spins(g, p, state.spins).log_w
            runner = _Runner(g, p, chain, state, replica_rng(seed, rep, i))
            runner.advance(burn)
            steps += runner.step
            runner.reset_stats()
            Ds.append(collect(runner, per_rep[rep], 0, spacing)[1])
            steps += runner.step
        return Ds, steps

    if threads > 1 and replicas > 1:
        with ThreadPoolExecutor(threads) as pool:
            outs = list(pool.map(run, range(replicas)))
    else:
        outs = [run(rep) for rep in range(replicas)]

    means, errs = [], []
    for i in range(r):
        terms = ratio_terms(np.concatenate([o[0][i] for o in outs]), sched.betas[i + 1] - sched.betas[i])
        means.append(float(terms.mean()))
        errs.append(batch_stderr(terms))
    log_Z = base + float(np.sum(np.log(means)))
    return EstimateReport(log_Z, base, list(sched.betas), means, errs, n, int(sum(o[1] for o in outs)),
                          seed, replicas, chain, time.perf_counter() - t0)


@dataclass
class OmegaRatio:
    ratio: float
    stderr: float
    omega0_steps: int
    omega2_steps: int

    def bound(self, g: Graph, params: ModelParams) -> float:
        return omega_ratio_bound(g, params)


def omega_ratio_bound(g: Graph, params: ModelParams) -> float:
    """``2 m^2 exp(2 (beta * maxdeg + max|mu|))``: upper bound on H2/H0."""
    return 2 * g.m ** 2 * math.exp(2 * (abs(params.beta) * g.max_degree + params.max_abs_mu()))


def measure_omega_ratio(g: Graph, params: ModelParams, steps: int, seed: int = 0, burn_in: int = 10_000,
                        n_batches: int = 50) -> OmegaRatio:
    """Estimate H2/H0 as (time in Omega_2) / (time in Omega_0) along the half-edge chain.

    The standard error comes from batch means of the Omega_0 indicator,
    propagated through ``R = (1 - p) / p``.
    """
    from .chains import ChainConfig, run_chain

    block = max(1, steps // n_batches)
    res = run_chain(g, params, ChainConfig("half_edge", steps=block * n_batches, burn_in=burn_in,
                                           seed=seed, thin=1 << 40, block=block))
    p_blocks = res.blocks[0] / block
    p = res.omega0_fraction
    if p == 0:
        return OmegaRatio(math.inf, math.inf, res.omega0_steps, res.omega2_steps)
    se_p = p_blocks.std(ddof=1) / math.sqrt(n_batches)
    return OmegaRatio((1 - p) / p, se_p / p ** 2, res.omega0_steps, res.omega2_steps)
