"""Symmetric vertex functions for the Ising holant and the half-edge weight.

A vertex of degree d with o incident 1-spins contributes
``beta * o * (d - o)`` to the log weight; each half-edge carrying a 1 adds
half of its edge's field.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .graph import Graph


@dataclass(frozen=True)
class ModelParams:
    """Interaction energy ``beta`` and a uniform or per-edge field ``nu``."""

    beta: float
    nu: float | tuple[float, ...] = 0.0

    def __post_init__(self):
        if not math.isfinite(self.beta):
            raise ValueError("beta must be finite")
        if np.ndim(self.nu) == 0:
            nu = float(self.nu)
            if not math.isfinite(nu):
                raise ValueError("nu must be finite")
        else:
            nu = tuple(float(x) for x in self.nu)
            if not all(math.isfinite(x) for x in nu):
                raise ValueError("fields must be finite")
        object.__setattr__(self, "beta", float(self.beta))
        object.__setattr__(self, "nu", nu)

    @property
    def uniform(self) -> bool:
        return not isinstance(self.nu, tuple)

    @property
    def mu(self):
        if self.uniform:
            return self.nu / 2
        return tuple(x / 2 for x in self.nu)

    def edge_fields(self, m: int) -> np.ndarray:
        if self.uniform:
            return np.full(m, self.nu, dtype=float)
        if len(self.nu) != m:
            raise ValueError(f"expected {m} edge fields, got {len(self.nu)}")
        return np.asarray(self.nu, dtype=float)

    def max_abs_mu(self) -> float:
        if self.uniform:
            return abs(self.nu) / 2
        return max((abs(x) for x in self.nu), default=0.0) / 2

    def with_beta(self, beta: float) -> "ModelParams":
        return ModelParams(beta, self.nu)


@dataclass(frozen=True)
class Signature:
    """Signature vector ``[f_0, ..., f_d]`` of a symmetric function.

    ``log_values`` is carried alongside when the entries are defined through
    exponentials, so products of large entries stay representable.
    """

    values: tuple
    log_values: tuple[float, ...] | None = None

    def __post_init__(self):
        vals = tuple(self.values)
        if not vals:
            raise ValueError("signature needs at least one entry")
        if any(v < 0 for v in vals):
            raise ValueError("signature entries must be nonnegative")
        object.__setattr__(self, "values", vals)
        if self.log_values is not None:
            lv = tuple(float(x) for x in self.log_values)
            if len(lv) != len(vals):
                raise ValueError("log_values length mismatch")
            object.__setattr__(self, "log_values", lv)

    @property
    def arity(self) -> int:
        return len(self.values) - 1

    def __len__(self):
        return len(self.values)

    def __getitem__(self, i):
        return self.values[i]

    def logs(self) -> np.ndarray:
        if self.log_values is not None:
            return np.array(self.log_values)
        with np.errstate(divide="ignore"):
            return np.log(np.array([float(v) for v in self.values]))

    def is_self_complementary(self) -> bool:
        d = self.arity
        if self.log_values is not None:
            lv = self.log_values
            return all(math.isclose(lv[i], lv[d - i], rel_tol=1e-12, abs_tol=1e-12) for i in range(d + 1))
        return all(self.values[i] == self.values[d - i] for i in range(d + 1))


def ising_signature(beta: float, mu: float, d: int) -> Signature:
    """``F_{beta,mu,d}``: entry i is ``exp(beta*i*(d-i) + mu*i)``."""
    if d < 0:
        raise ValueError("arity must be nonnegative")
    logs = tuple(beta * i * (d - i) + mu * i for i in range(d + 1))
    with np.errstate(over="ignore"):
        vals = tuple(float(np.exp(x)) for x in logs)
    return Signature(vals, logs)


def pin(sig: Signature, a: int, b: int) -> Signature:
    """Pin ``a`` inputs to 1 and ``d - b`` inputs to 0: ``[f_a, ..., f_b]``."""
    d = sig.arity
    if not (0 <= a <= b <= d):
        raise ValueError(f"need 0 <= a <= b <= {d}, got a={a}, b={b}")
    lv = None if sig.log_values is None else sig.log_values[a:b + 1]
    return Signature(sig.values[a:b + 1], lv)


def complement_product(g: Signature) -> Signature:
    """``H(x) = G(x) G(complement x)``, entries ``g_i * g_{m-i}``."""
    m = g.arity
    vals = tuple(g.values[i] * g.values[m - i] for i in range(m + 1))
    lv = None
    if g.log_values is not None:
        lv = tuple(g.log_values[i] + g.log_values[m - i] for i in range(m + 1))
    return Signature(vals, lv)


def half_vector(h_sig: Signature) -> list:
    if not h_sig.is_self_complementary():
        raise ValueError("half-vector is only defined for self-complementary signatures")
    return list(h_sig.values[: h_sig.arity // 2 + 1])


def _spins_of(state) -> np.ndarray:
    return np.asarray(getattr(state, "spins", state), dtype=np.int64)


def _ones_at(g: Graph, spins: np.ndarray) -> np.ndarray:
    return np.bincount(g.owner, weights=spins, minlength=g.n).astype(np.int64) if g.m else np.zeros(g.n, np.int64)


def log_weight(g: Graph, params: ModelParams, state) -> float:
    """Log of the half-edge weight of ``state`` (a HalfEdgeState or spin array)."""
    spins = _spins_of(state)
    if spins.shape != (2 * g.m,):
        raise ValueError(f"expected {2 * g.m} half-edge spins, got shape {spins.shape}")
    o = _ones_at(g, spins)
    d = g.degrees
    half_field = np.repeat(params.edge_fields(g.m) / 2, 2)
    return float(params.beta * np.sum(o * (d - o)) + np.dot(half_field, spins))


def log_weight_delta(g: Graph, params: ModelParams, state, h1, h2) -> float:
    """Change in log weight from flipping half-edges ``h1`` and ``h2``.

    Uses the per-vertex one-counts of ``state`` when present, so only the
    one or two affected vertex factors are touched.
    """
    h1 = int(getattr(h1, "index", h1))
    h2 = int(getattr(h2, "index", h2))
    if h1 == h2:
        raise ValueError("h1 and h2 must differ")
    spins = getattr(state, "spins", state)
    ones = getattr(state, "ones", None)
    if ones is None:
        ones = _ones_at(g, np.asarray(spins, dtype=np.int64))
    e1, e2 = h1 >> 1, h2 >> 1
    v1, v2 = g.edges[e1][h1 & 1], g.edges[e2][h2 & 1]
    s1 = 1 - 2 * int(spins[h1])
    s2 = 1 - 2 * int(spins[h2])
    beta = params.beta
    if params.uniform:
        f1 = f2 = params.nu / 2
    else:
        f1, f2 = params.nu[e1] / 2, params.nu[e2] / 2
    delta = f1 * s1 + f2 * s2
    if v1 == v2:
        d, o = g.degree(v1), int(ones[v1])
        o2 = o + s1 + s2
        delta += beta * (o2 * (d - o2) - o * (d - o))
    else:
        for v, s in ((v1, s1), (v2, s2)):
            d, o = g.degree(v), int(ones[v])
            delta += beta * ((o + s) * (d - o - s) - o * (d - o))
    return float(delta)


def bichromatic_count(g: Graph, edge_spins: Sequence[int]) -> int:
    """Number of bichromatic edges of the line graph under an edge configuration."""
    s = np.asarray(edge_spins, dtype=np.int64)
    o = np.bincount(np.asarray(g.edges, dtype=np.int64).reshape(-1), weights=np.repeat(s, 2), minlength=g.n).astype(np.int64) if g.m else np.zeros(g.n, np.int64)
    return int(np.sum(o * (g.degrees - o)))
