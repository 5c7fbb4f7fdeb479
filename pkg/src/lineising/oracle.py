"""Brute-force references for small instances.

Everything here enumerates; sums are taken in log-sum-exp form.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .graph import Graph, line_graph
from .signatures import ModelParams, ising_signature

MAX_VERTEX_MODEL = 24
MAX_H0_EDGES = 20
MAX_H2_EDGES = 16
MAX_STATES = 1 << 16
_CHUNK = 1 << 16


class OracleCapError(ValueError):
    """Instance too large for exhaustive enumeration."""


def _bits(lo: int, hi: int, width: int) -> np.ndarray:
    idx = np.arange(lo, hi, dtype=np.int64)
    return ((idx[:, None] >> np.arange(width, dtype=np.int64)) & 1).astype(np.int8)


def exact_Z_vertex_model(lg: Graph, beta: float, fields=0.0) -> float:
    """log Z of the vertex Ising model on ``lg``: sum over all 0/1 vertex spins."""
    nv = lg.n
    if nv > MAX_VERTEX_MODEL:
        raise OracleCapError(f"{nv} vertices exceeds the cap of {MAX_VERTEX_MODEL}")
    nu = np.broadcast_to(np.asarray(fields, dtype=float), (nv,))
    E = np.asarray(lg.edges, dtype=np.int64).reshape(-1, 2)
    parts = []
    for lo in range(0, 1 << nv, _CHUNK):
        s = _bits(lo, min(1 << nv, lo + _CHUNK), nv)
        bichrom = (s[:, E[:, 0]] != s[:, E[:, 1]]).sum(axis=1) if len(E) else 0
        parts.append(logsumexp(beta * bichrom + s @ nu))
    return float(logsumexp(parts))


def _vertex_tables(g: Graph, beta: float):
    """log F_{beta,0,d(k)} per vertex, padded to a common width."""
    d = g.degrees
    width = int(d.max()) + 1 if g.n else 1
    tab = np.full((g.n, width), -np.inf)
    for k in range(g.n):
        tab[k, : d[k] + 1] = ising_signature(beta, 0.0, int(d[k])).log_values
    return tab


def half_edge_log_weights(g: Graph, params: ModelParams, spins: np.ndarray) -> np.ndarray:
    """Log weights of a batch of half-edge configurations, shape ``(N, 2m)``.

    Vertex factors are read off the signature table; each half-edge spin
    carries half of its edge's field.
    """
    spins = np.asarray(spins, dtype=np.int64)
    inc = np.zeros((2 * g.m, g.n), dtype=np.int64)
    inc[np.arange(2 * g.m), g.owner] = 1
    ones = spins @ inc
    tab = _vertex_tables(g, params.beta)
    vert = tab[np.arange(g.n)[None, :], ones].sum(axis=1)
    half = np.repeat(params.edge_fields(g.m) / 2, 2)
    return vert + spins @ half


def exact_H0(g: Graph, params: ModelParams) -> float:
    """log of the total weight of consistent configurations."""
    m = g.m
    if m > MAX_H0_EDGES:
        raise OracleCapError(f"{m} edges exceeds the H0 cap of {MAX_H0_EDGES}")
    parts = []
    for lo in range(0, 1 << m, _CHUNK):
        e = _bits(lo, min(1 << m, lo + _CHUNK), m)
        parts.append(logsumexp(half_edge_log_weights(g, params, np.repeat(e, 2, axis=1))))
    return float(logsumexp(parts))


def exact_H2(g: Graph, params: ModelParams) -> float:
    """log of the total weight of configurations inconsistent on exactly two edges."""
    m = g.m
    if m > MAX_H2_EDGES:
        raise OracleCapError(f"{m} edges exceeds the H2 cap of {MAX_H2_EDGES}")
    if m < 2:
        return -np.inf
    rest = np.repeat(_bits(0, 1 << (m - 2), m - 2), 2, axis=1)
    parts = []
    for e, f in itertools.combinations(range(m), 2):
        others = [h for h in range(2 * m) if h >> 1 not in (e, f)]
        for pe, pf in itertools.product(((0, 1), (1, 0)), repeat=2):
            spins = np.zeros((len(rest), 2 * m), dtype=np.int64)
            spins[:, others] = rest
            spins[:, 2 * e: 2 * e + 2] = pe
            spins[:, 2 * f: 2 * f + 2] = pf
            parts.append(logsumexp(half_edge_log_weights(g, params, spins)))
    return float(logsumexp(parts))


def exact_H2_raw(g: Graph, params: ModelParams) -> float:
    """H2 by scanning all ``4^m`` half-edge configurations (small m only)."""
    m = g.m
    if m > 8:
        raise OracleCapError("raw half-edge enumeration is limited to m <= 8")
    s = _bits(0, 1 << (2 * m), 2 * m).astype(np.int64)
    bad = (s[:, 0::2] != s[:, 1::2]).sum(axis=1)
    sel = s[bad == 2]
    if not len(sel):
        return -np.inf
    return float(logsumexp(half_edge_log_weights(g, params, sel)))


def exact_H0_subdivided(g: Graph, params: ModelParams) -> float:
    """H0 with the field moved onto a degree-2 vertex inserted in every edge.

    The inserted vertex has signature ``[1, 0, e^{nu_e}]``; original
    vertices carry the field-free ``F_{beta,0,d}``.
    """
    m = g.m
    if 2 * m > MAX_H0_EDGES:
        raise OracleCapError("subdivided graph too large")
    nu = params.edge_fields(m)
    tab = _vertex_tables(g, params.beta)
    owner = g.owner
    parts = []
    for lo in range(0, 1 << (2 * m), _CHUNK):
        s = _bits(lo, min(1 << (2 * m), lo + _CHUNK), 2 * m).astype(np.int64)
        # s[:, h] is the spin on the new edge between owner[h] and the middle vertex of h's edge
        ones = np.zeros((len(s), g.n), dtype=np.int64)
        np.add.at(ones.T, owner, s.T)
        a, b = s[:, 0::2], s[:, 1::2]
        with np.errstate(divide="ignore"):
            mid = np.where(a == b, np.where(a == 1, nu, 0.0), -np.inf).sum(axis=1)
        vert = tab[np.arange(g.n)[None, :], ones].sum(axis=1)
        parts.append(logsumexp(vert + mid))
    return float(logsumexp(parts))


@dataclass
class ExactSummary:
    log_H0: float
    log_H2: float
    log_Z_line_graph: float

    @property
    def omega_ratio(self) -> float:
        return float(np.exp(self.log_H2 - self.log_H0))

    def to_dict(self) -> dict:
        return {"log_Z": self.log_Z_line_graph, "log_H0": self.log_H0, "log_H2": self.log_H2}


def exact_summary(g: Graph, params: ModelParams) -> ExactSummary:
    lg = line_graph(g)
    return ExactSummary(exact_H0(g, params), exact_H2(g, params),
                        exact_Z_vertex_model(lg, params.beta, params.edge_fields(g.m)))


def exact_gibbs(g: Graph, params: ModelParams) -> np.ndarray:
    """Gibbs probabilities on L(g), indexed by the integer whose bit e is the spin of edge e."""
    m = g.m
    if m > MAX_H0_EDGES:
        raise OracleCapError("too many edges for exact Gibbs")
    e = _bits(0, 1 << m, m)
    lw = half_edge_log_weights(g, params, np.repeat(e, 2, axis=1))
    return np.exp(lw - logsumexp(lw))


def edge_config_index(samples: np.ndarray) -> np.ndarray:
    samples = np.asarray(samples, dtype=np.int64)
    return samples @ (1 << np.arange(samples.shape[1], dtype=np.int64))


def empirical_distribution(samples: np.ndarray, m: int) -> np.ndarray:
    counts = np.bincount(edge_config_index(samples), minlength=1 << m).astype(float)
    return counts / counts.sum()


def tv_distance(p, q) -> float:
    p, q = np.asarray(p, dtype=float), np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise ValueError("distributions must have the same support")
    return float(0.5 * np.abs(p - q).sum())


def stationary_distribution(P: np.ndarray, tol: float = 1e-12, max_iter: int = 1_000_000) -> np.ndarray:
    """Power iteration from the uniform vector until ``||pi P - pi||_1 <= tol``.

    Small matrices are first squared repeatedly, which runs the same
    iteration at exponentially growing step counts.
    """
    N = P.shape[0]
    pi = np.full(N, 1.0 / N)
    if N <= 2048:
        Q = P.copy()
        for _ in range(60):
            Q = Q @ Q
            if np.ptp(Q, axis=0).max() < 1e-15:
                break
        pi = Q.mean(axis=0)
        pi /= pi.sum()
    for _ in range(max_iter):
        nxt = pi @ P
        nxt /= nxt.sum()
        if np.abs(nxt - pi).sum() <= tol:
            return nxt
        pi = nxt
    raise RuntimeError("power iteration did not converge; chain may not be ergodic")


def exact_stationary(g: Graph, params: ModelParams, chain_kind: str):
    """Stationary law of the explicitly assembled kernel: ``(states, pi, P)``."""
    from .chains import transition_matrix

    if (chain_kind == "half_edge" and 2 * g.m > 16) or g.m > 16:
        raise OracleCapError("state space exceeds 2^16")
    states, P = transition_matrix(g, params, chain_kind, MAX_STATES)
    return states, stationary_distribution(P), P
