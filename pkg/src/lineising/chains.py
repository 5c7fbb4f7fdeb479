"""Half-edge Metropolis chain and censored (whole-edge) Glauber dynamics.

Random draws are generated in fixed-size chunks by numpy's ``Generator`` and
fed to numba kernels, so a run is a deterministic function of its seed.
"""
from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .graph import Graph
from .signatures import ModelParams, log_weight, log_weight_delta

CHUNK = 1 << 16
REFRESH = 10_000
KINDS = ("half_edge", "glauber")


@dataclass
class HalfEdgeState:
    """Spins on all 2m half-edges plus cached counters.

    ``ones[k]`` is the number of 1-spins at vertex k, ``n_bad`` the number
    of edges whose two halves disagree, ``log_w`` the cached log weight.
    """

    spins: np.ndarray
    ones: np.ndarray
    n_bad: int
    log_w: float

    @classmethod
    def from_spins(cls, g: Graph, params: ModelParams, spins) -> "HalfEdgeState":
        spins = np.ascontiguousarray(spins, dtype=np.uint8).copy()
        if spins.shape != (2 * g.m,):
            raise ValueError(f"expected {2 * g.m} half-edge spins")
        ones = np.bincount(g.owner, weights=spins, minlength=g.n).astype(np.int64)
        n_bad = int(np.sum(spins[0::2] != spins[1::2]))
        return cls(spins, ones, n_bad, log_weight(g, params, spins))

    @classmethod
    def from_edge_spins(cls, g: Graph, params: ModelParams, edge_spins) -> "HalfEdgeState":
        return cls.from_spins(g, params, np.repeat(np.asarray(edge_spins, dtype=np.uint8), 2))

    @classmethod
    def zeros(cls, g: Graph, params: ModelParams) -> "HalfEdgeState":
        return cls.from_spins(g, params, np.zeros(2 * g.m, dtype=np.uint8))

    @property
    def inconsistent_edges(self) -> frozenset:
        return frozenset(np.flatnonzero(self.spins[0::2] != self.spins[1::2]).tolist())

    @property
    def is_consistent(self) -> bool:
        return self.n_bad == 0

    def edge_spins(self) -> np.ndarray:
        if self.n_bad:
            raise ValueError("state is not consistent")
        return self.spins[0::2].copy()

    def copy(self) -> "HalfEdgeState":
        return HalfEdgeState(self.spins.copy(), self.ones.copy(), self.n_bad, self.log_w)

    def validate(self, g: Graph, params: ModelParams, atol: float = 1e-8) -> None:
        ref = HalfEdgeState.from_spins(g, params, self.spins)
        if not np.array_equal(ref.ones, self.ones):
            raise AssertionError("ones_at_vertex out of sync with spins")
        if ref.n_bad != self.n_bad or self.n_bad not in (0, 2):
            raise AssertionError(f"inconsistent edge count {self.n_bad} (actual {ref.n_bad})")
        if abs(ref.log_w - self.log_w) > atol:
            raise AssertionError("cached log weight drifted")


@dataclass
class ChainConfig:
    kind: str = "half_edge"
    steps: int = 10_000
    burn_in: int = 0
    seed: int = 0
    thin: int = 1
    replicas: int = 1
    threads: int = 1
    initial: np.ndarray | None = None  # edge spins; all zeros when None
    block: int | None = None  # Omega_0 occupancy is also tallied per block of steps

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}")
        if self.steps < 0 or self.burn_in < 0:
            raise ValueError("steps and burn_in must be nonnegative")
        if self.thin < 1 or self.replicas < 1 or self.threads < 1:
            raise ValueError("thin, replicas and threads must be positive")


# ---------------------------------------------------------------- kernels

@njit(cache=True, nogil=True)
def _full_log_weight(spins, owner, deg, hfield, beta, ones_out):
    ones_out[:] = 0
    lw = 0.0
    for h in range(spins.shape[0]):
        if spins[h]:
            ones_out[owner[h]] += 1
            lw += hfield[h >> 1]
    for k in range(deg.shape[0]):
        lw += beta * ones_out[k] * (deg[k] - ones_out[k])
    return lw


@njit(cache=True, nogil=True)
def _bichromatic(ones, deg):
    s = 0
    for k in range(deg.shape[0]):
        s += ones[k] * (deg[k] - ones[k])
    return s


@njit(cache=True, nogil=True)
def _vertex_delta(beta, o, d, s):
    return beta * ((o + s) * (d - o - s) - o * (d - o))


@njit(cache=True, nogil=True)
def _refresh(spins, ones, owner, deg, hfield, beta, n_bad, log_w, scratch, stats, drift):
    full = _full_log_weight(spins, owner, deg, hfield, beta, scratch)
    bad = 0
    for e in range(spins.shape[0] // 2):
        if spins[2 * e] != spins[2 * e + 1]:
            bad += 1
    ok = bad == n_bad and (bad == 0 or bad == 2)
    for k in range(ones.shape[0]):
        if scratch[k] != ones[k]:
            ok = False
    if not ok:
        stats[5] += 1
    err = abs(full - log_w)
    if err > drift[0]:
        drift[0] = err
    return full


@njit(cache=True, nogil=True)
def _record(spins, ones, deg, out_edges, out_D, n_out):
    for e in range(out_edges.shape[1]):
        out_edges[n_out, e] = spins[2 * e]
    out_D[n_out] = _bichromatic(ones, deg)


@njit(cache=True, nogil=True)
def _half_edge_kernel(spins, ones, owner, deg, hfield, beta, n_bad, log_w,
                      picks, unif, step0, thin,
                      out_edges, out_D, n_out,
                      stats, block, blocks, drift, scratch):
    # stats: omega0, omega2, tested, accepted, censored, violations
    nsteps = picks.shape[0]
    for t in range(nsteps):
        h1 = picks[t, 0]
        h2 = picks[t, 1]
        if h1 != h2 and unif[t, 0] >= 0.5:
            e1 = h1 >> 1
            e2 = h2 >> 1
            new_bad = n_bad
            if e1 != e2:
                new_bad += 1 if spins[h1] == spins[h1 ^ 1] else -1
                new_bad += 1 if spins[h2] == spins[h2 ^ 1] else -1
            if new_bad > 2:
                stats[4] += 1
            else:
                s1 = 1 - 2 * np.int64(spins[h1])
                s2 = 1 - 2 * np.int64(spins[h2])
                v1 = owner[h1]
                v2 = owner[h2]
                delta = hfield[e1] * s1 + hfield[e2] * s2
                if v1 == v2:
                    o = ones[v1]
                    delta += _vertex_delta(beta, o, deg[v1], s1 + s2)
                else:
                    delta += _vertex_delta(beta, ones[v1], deg[v1], s1)
                    delta += _vertex_delta(beta, ones[v2], deg[v2], s2)
                stats[2] += 1
                if delta >= 0.0 or unif[t, 1] < math.exp(delta):
                    stats[3] += 1
                    spins[h1] ^= 1
                    spins[h2] ^= 1
                    ones[v1] += s1
                    ones[v2] += s2
                    n_bad = new_bad
                    log_w += delta
        g = step0 + t
        if n_bad == 0:
            stats[0] += 1
            if block > 0:
                blocks[g // block] += 1
        else:
            stats[1] += 1
        if (g + 1) % thin == 0 and n_bad == 0 and n_out < out_D.shape[0]:
            _record(spins, ones, deg, out_edges, out_D, n_out)
            n_out += 1
        if (g + 1) % REFRESH == 0:
            log_w = _refresh(spins, ones, owner, deg, hfield, beta, n_bad, log_w, scratch, stats, drift)
    return n_bad, log_w, n_out


@njit(cache=True, nogil=True)
def _glauber_kernel(spins, ones, owner, deg, hfield, beta, log_w,
                    picks, unif, step0, thin,
                    out_edges, out_D, n_out,
                    stats, drift, scratch):
    nsteps = picks.shape[0]
    for t in range(nsteps):
        if unif[t, 0] >= 0.5:
            e = picks[t]
            h = 2 * e
            s = 1 - 2 * np.int64(spins[h])
            u = owner[h]
            v = owner[h + 1]
            delta = 2.0 * hfield[e] * s
            delta += _vertex_delta(beta, ones[u], deg[u], s)
            delta += _vertex_delta(beta, ones[v], deg[v], s)
            stats[2] += 1
            if delta >= 0.0 or unif[t, 1] < math.exp(delta):
                stats[3] += 1
                spins[h] ^= 1
                spins[h + 1] ^= 1
                ones[u] += s
                ones[v] += s
                log_w += delta
        stats[0] += 1
        g = step0 + t
        if (g + 1) % thin == 0 and n_out < out_D.shape[0]:
            _record(spins, ones, deg, out_edges, out_D, n_out)
            n_out += 1
        if (g + 1) % REFRESH == 0:
            log_w = _refresh(spins, ones, owner, deg, hfield, beta, 0, log_w, scratch, stats, drift)
    return log_w, n_out


# ---------------------------------------------------------------- driver

class _Runner:
    """Owns one chain's state and RNG; advances it in chunks."""

    def __init__(self, g: Graph, params: ModelParams, kind: str, state: HalfEdgeState, rng: np.random.Generator):
        if g.m == 0:
            raise ValueError("chains need at least one edge")
        if kind == "glauber" and not state.is_consistent:
            raise ValueError("Glauber dynamics must start in Omega_0")
        self.g, self.params, self.kind, self.state, self.rng = g, params, kind, state, rng
        self.owner = g.owner
        self.deg = g.degrees
        self.hfield = params.edge_fields(g.m) / 2
        self.scratch = np.zeros(g.n, dtype=np.int64)
        self.stats = np.zeros(6, dtype=np.int64)
        self.drift = np.zeros(1)
        self.step = 0

    def _draws(self, k):
        if self.kind == "half_edge":
            picks = self.rng.integers(0, 2 * self.g.m, size=(k, 2), dtype=np.int64)
        else:
            picks = self.rng.integers(0, self.g.m, size=k, dtype=np.int64)
        return picks, self.rng.random((k, 2))

    def advance(self, steps, thin=None, capacity=0, block=0, blocks=None):
        """Run ``steps`` steps, recording consistent states at multiples of ``thin``."""
        s = self.state
        m = self.g.m
        thin = thin or (1 << 62)
        out_edges = np.zeros((capacity, m), dtype=np.uint8)
        out_D = np.zeros(capacity, dtype=np.int64)
        if blocks is None:
            blocks = np.zeros(1, dtype=np.int64)
        n_out = 0
        done = 0
        while done < steps:
            k = min(CHUNK, steps - done)
            picks, unif = self._draws(k)
            if self.kind == "half_edge":
                s.n_bad, s.log_w, n_out = _half_edge_kernel(
                    s.spins, s.ones, self.owner, self.deg, self.hfield, self.params.beta,
                    s.n_bad, s.log_w, picks, unif, self.step, thin,
                    out_edges, out_D, n_out, self.stats, block, blocks,
                    self.drift, self.scratch)
            else:
                s.log_w, n_out = _glauber_kernel(
                    s.spins, s.ones, self.owner, self.deg, self.hfield, self.params.beta,
                    s.log_w, picks, unif, self.step, thin, out_edges, out_D, n_out,
                    self.stats, self.drift, self.scratch)
            self.step += k
            done += k
        return out_edges[:n_out], out_D[:n_out]

    def reset_stats(self):
        self.stats[:] = 0
        self.drift[:] = 0
        self.step = 0


def replica_rng(seed: int, replica: int = 0, *extra: int) -> np.random.Generator:
    """Independent stream for (master seed, replica index, ...)."""
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(int(replica), *map(int, extra))))


def half_edge_step(g: Graph, params: ModelParams, state: HalfEdgeState, rng: np.random.Generator) -> HalfEdgeState:
    """One transition of the half-edge Metropolis chain (updates ``state`` in place)."""
    _Runner(g, params, "half_edge", state, rng).advance(1)
    return state


def glauber_step(g: Graph, params: ModelParams, state: HalfEdgeState, rng: np.random.Generator) -> HalfEdgeState:
    """One lazy whole-edge Metropolis update; ``state`` must be consistent."""
    if not state.is_consistent:
        raise ValueError("glauber_step called on a state outside Omega_0")
    _Runner(g, params, "glauber", state, rng).advance(1)
    return state


@dataclass
class ChainResult:
    samples: np.ndarray  # (k, m) edge spins, consistent states only
    bichromatic: np.ndarray  # line-graph bichromatic edge count per sample
    steps: int
    omega0_steps: int
    omega2_steps: int
    tested: int
    accepted: int
    censored: int
    violations: int
    max_drift: float
    blocks: list = field(default_factory=list, repr=False)
    final_states: list = field(default_factory=list, repr=False)
    replica_sizes: list = field(default_factory=list, repr=False)

    @property
    def omega0_fraction(self) -> float:
        return self.omega0_steps / max(1, self.omega0_steps + self.omega2_steps)

    @property
    def acceptance_rate(self) -> float:
        return self.accepted / self.tested if self.tested else 1.0

    def to_dict(self) -> dict:
        return {
            "samples": int(len(self.samples)),
            "steps": int(self.steps),
            "omega0_steps": int(self.omega0_steps),
            "omega2_steps": int(self.omega2_steps),
            "omega0_fraction": float(self.omega0_fraction),
            "acceptance_rate": float(self.acceptance_rate),
            "censored": int(self.censored),
            "violations": int(self.violations),
            "max_drift": float(self.max_drift),
        }


def _initial_state(g, params, cfg):
    if cfg.initial is None:
        return HalfEdgeState.zeros(g, params)
    init = np.asarray(cfg.initial)
    if init.shape == (2 * g.m,):
        return HalfEdgeState.from_spins(g, params, init)
    return HalfEdgeState.from_edge_spins(g, params, init)


def _run_replica(g, params, cfg: ChainConfig, r: int):
    runner = _Runner(g, params, cfg.kind, _initial_state(g, params, cfg), replica_rng(cfg.seed, r))
    runner.advance(cfg.burn_in)
    runner.reset_stats()
    block = cfg.block or 0
    blocks = np.zeros(-(-cfg.steps // block) if block else 1, dtype=np.int64)
    edges, D = runner.advance(cfg.steps, thin=cfg.thin, capacity=cfg.steps // cfg.thin + 1,
                                 block=block, blocks=blocks)
    return edges, D, runner.stats.copy(), float(runner.drift[0]), blocks, runner.state


def run_chain(g: Graph, params: ModelParams, cfg: ChainConfig) -> ChainResult:
    """Run ``cfg.replicas`` independent chains and pool their output in replica order.

    Samples are taken every ``cfg.thin`` steps; for the half-edge chain a
    sampling time at which the chain sits in Omega_2 is skipped, which keeps
    the recorded states distributed as the stationary law restricted to
    Omega_0 (waiting for the next Omega_0 visit would not).
    """
    reps = range(cfg.replicas)
    if cfg.threads > 1 and cfg.replicas > 1:
        with ThreadPoolExecutor(cfg.threads) as pool:
            outs = list(pool.map(lambda r: _run_replica(g, params, cfg, r), reps))
    else:
        outs = [_run_replica(g, params, cfg, r) for r in reps]
    stats = sum(o[2] for o in outs)
    omega0 = int(stats[0]) if cfg.kind == "half_edge" else cfg.steps * cfg.replicas
    return ChainResult(
        samples=np.concatenate([o[0] for o in outs]),
        bichromatic=np.concatenate([o[1] for o in outs]),
        steps=cfg.steps * cfg.replicas,
        omega0_steps=omega0,
        omega2_steps=int(stats[1]),
        tested=int(stats[2]),
        accepted=int(stats[3]),
        censored=int(stats[4]),
        violations=int(stats[5]),
        max_drift=max(o[3] for o in outs),
        blocks=[o[4] for o in outs],
        final_states=[o[5] for o in outs],
        replica_sizes=[len(o[1]) for o in outs],
    )


def collect(runner: _Runner, n: int, burn_in: int, thin: int):
    """Burn in, then record ``n`` consistent states spaced ``thin`` steps apart.

    Returns ``(edge_spins, bichromatic)``.  Statistics on the runner cover
    the sampling phase only.
    """
    runner.advance(burn_in)
    runner.reset_stats()
    edges, Ds = [], []
    got = 0
    while got < n:
        need = n - got
        e, D = runner.advance(need * thin, thin=thin, capacity=need)
        edges.append(e)
        Ds.append(D)
        got += len(D)
    if not edges:
        return np.zeros((0, runner.g.m), np.uint8), np.zeros(0, np.int64)
    return np.concatenate(edges)[:n], np.concatenate(Ds)[:n]


def draw_samples(g: Graph, params: ModelParams, n: int, cfg: ChainConfig) -> ChainResult:
    """``n`` samples split over ``cfg.replicas`` chains, spaced ``cfg.thin`` apart.

    ``cfg.steps`` is ignored; each replica runs as long as it needs.
    """
    per_rep = [n // cfg.replicas + (1 if i < n % cfg.replicas else 0) for i in range(cfg.replicas)]

    def one(r):
        runner = _Runner(g, params, cfg.kind, _initial_state(g, params, cfg), replica_rng(cfg.seed, r))
        edges, D = collect(runner, per_rep[r], cfg.burn_in, cfg.thin)
        return edges, D, runner.stats.copy(), float(runner.drift[0]), runner.step, runner.state

    if cfg.threads > 1 and cfg.replicas > 1:
        with ThreadPoolExecutor(cfg.threads) as pool:
            outs = list(pool.map(one, range(cfg.replicas)))
    else:
        outs = [one(r) for r in range(cfg.replicas)]
    stats = sum(o[2] for o in outs)
    steps = int(sum(o[4] for o in outs))
    return ChainResult(
        samples=np.concatenate([o[0] for o in outs]),
        bichromatic=np.concatenate([o[1] for o in outs]),
        steps=steps,
        omega0_steps=int(stats[0]),
        omega2_steps=int(stats[1]),
        tested=int(stats[2]),
        accepted=int(stats[3]),
        censored=int(stats[4]),
        violations=int(stats[5]),
        max_drift=max(o[3] for o in outs),
        final_states=[o[5] for o in outs],
        replica_sizes=[len(o[1]) for o in outs],
    )


def sample_gibbs(g: Graph, params: ModelParams, total_steps: int, rng: np.random.Generator,
                 state: HalfEdgeState | None = None) -> np.ndarray:
    """Approximate Gibbs sample on L(g) from the half-edge chain.

    Runs ``total_steps`` steps; if the chain then sits in Omega_2 it runs
    another ``total_steps`` and checks again, until it stops in Omega_0.
    Stopping at the first return to Omega_0 instead would favour states
    with heavy inflow from Omega_2.
    """
    if total_steps < 1:
        raise ValueError("total_steps must be positive")
    state = HalfEdgeState.zeros(g, params) if state is None else state
    runner = _Runner(g, params, "half_edge", state, rng)
    runner.advance(total_steps)
    while not state.is_consistent:
        runner.advance(total_steps)
    return state.edge_spins()


# ---------------------------------------------------------------- explicit kernels

def enumerate_states(g: Graph, kind: str) -> list[tuple[int, ...]]:
    """All half-edge spin vectors of the state space (Omega or Omega_0)."""
    m = g.m
    if kind == "glauber":
        return [tuple(x for s in bits for x in (s, s)) for bits in itertools.product((0, 1), repeat=m)]
    out = []
    for spins in itertools.product((0, 1), repeat=2 * m):
        bad = sum(spins[2 * e] != spins[2 * e + 1] for e in range(m))
        if bad in (0, 2):
            out.append(spins)
    return out


def transition_matrix(g: Graph, params: ModelParams, kind: str, max_states: int = 1 << 16):
    """Assemble the full transition matrix from the step rules.

    Returns ``(states, P)`` with ``states`` a list of half-edge spin tuples.
    """
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}")
    if (kind == "half_edge" and 2 * g.m > 16) or (kind == "glauber" and g.m > 16):
        raise ValueError("state space too large to enumerate")
    states = enumerate_states(g, kind)
    if len(states) > max_states:
        raise ValueError("state space too large to enumerate")
    index = {s: i for i, s in enumerate(states)}
    N, m = len(states), g.m
    P = np.zeros((N, N))
    for i, s in enumerate(states):
        st = HalfEdgeState.from_spins(g, params, s)
        if kind == "half_edge":
            moves = [(h1, h2) for h1 in range(2 * m) for h2 in range(2 * m) if h1 != h2]
            prob = 0.5 / (2 * m) ** 2
        else:
            moves = [(2 * e, 2 * e + 1) for e in range(m)]
            prob = 0.5 / m
        for h1, h2 in moves:
            t = list(s)
            t[h1] ^= 1
            t[h2] ^= 1
            j = index.get(tuple(t))
            if j is None:
                continue  # leaves Omega: censored
            delta = log_weight_delta(g, params, st, h1, h2)
            P[i, j] += prob * min(1.0, math.exp(delta))
        P[i, i] += 1.0 - P[i].sum()
    return states, P
