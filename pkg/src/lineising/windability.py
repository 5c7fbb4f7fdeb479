"""Windability certificates for symmetric signatures.

A symmetric ``F`` is windable iff for every pinning ``G`` of arity
``m >= 1`` the half-vector ``h`` of ``H(x) = G(x) G(~x)`` admits a
nonnegative solution of ``A_m x = h``.  ``A_m`` is lower triangular with a
positive diagonal, so the solution is unique and forward substitution
decides feasibility.

Right-hand-side convention used throughout this module:

* ``solve_pinning`` takes the plain half-vector ``h`` and solves
  ``A_m x = h``;
* the cone routines work with ``z(h)_i = C(m, i) h_i`` and the matrix
  ``B_m``, whose columns generate the cone ``C_n``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .signatures import Signature, complement_product, ising_signature, pin

FLOAT_TOL = 1e-12


def binom(n: int, k: int) -> int:
    """Binomial coefficient, zero when ``k < 0``, ``n < 0`` or ``k > n``."""
    if k < 0 or n < 0 or k > n:
        return 0
    return math.comb(n, k)


def double_factorial(x: int) -> int:
    if x < -1:
        raise ValueError("double factorial is defined for x >= -1")
    out = 1
    while x > 1:
        out *= x
        x -= 2
    return out


def row_sum_constant(m: int) -> int:
    """Number of pairings of m objects: ``(2n-1)!!`` or ``(2n+1)!!``."""
    n = m // 2
    return double_factorial(2 * n - 1) if m % 2 == 0 else double_factorial(2 * n + 1)


@dataclass(frozen=True)
class RationalMatrix:
    entries: tuple[tuple[Fraction, ...], ...]

    @property
    def rows(self) -> int:
        return len(self.entries)

    @property
    def cols(self) -> int:
        return len(self.entries[0]) if self.entries else 0

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def is_lower_triangular(self) -> bool:
        return all(self.entries[i][j] == 0 for i in range(self.rows) for j in range(i + 1, self.cols))

    def diagonal(self) -> list[Fraction]:
        return [self.entries[i][i] for i in range(min(self.rows, self.cols))]

    def matvec(self, x: Sequence) -> list:
        return [sum((a * xj for a, xj in zip(row, x)), Fraction(0)) for row in self.entries]

    def to_numpy(self) -> np.ndarray:
        return np.array([[float(a) for a in row] for row in self.entries])


def _a_entry(m: int, i: int, j: int) -> int:
    n = m // 2
    if j > i:
        return 0
    base = binom(i, j) * binom(m - i, j) * math.factorial(j)
    if m % 2 == 0:
        if (i - j) % 2:
            return 0
        return base * double_factorial(i - j - 1) * double_factorial(2 * n - i - j - 1)
    if (i - j) % 2 == 0:
        return base * double_factorial(i - j - 1) * double_factorial(2 * n + 1 - i - j)
    return base * double_factorial(i - j) * double_factorial(2 * n - i - j)


def matrix_A(m: int) -> RationalMatrix:
    """Pairing-count matrix ``A_m`` of size ``(n+1) x (n+1)``, ``n = m // 2``.

    Entry (i, j) counts pairings of m objects, i of the first kind, with
    exactly j mixed pairs.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    n = m // 2
    return RationalMatrix(tuple(tuple(Fraction(_a_entry(m, i, j)) for j in range(n + 1)) for i in range(n + 1)))


def _b_entry(m: int, i: int, j: int) -> int:
    n = m // 2
    if m % 2 == 0 and (i - j) % 2:
        return 0
    return binom(n - j, (i - j) // 2)


def matrix_B(m: int) -> RationalMatrix:
    """Reduced matrix ``B_m`` with entries ``C(n-j, floor((i-j)/2))``."""
    if m < 1:
        raise ValueError("m must be >= 1")
    n = m // 2
    return RationalMatrix(tuple(tuple(Fraction(_b_entry(m, i, j)) for j in range(n + 1)) for i in range(n + 1)))


def cone_generators(m: int) -> list[list[int]]:
    """Vectors ``v_k = [C(m-2k, i-k) : i in 0..n]`` for ``k in 0..n``."""
    n = m // 2
    return [[binom(m - 2 * k, i - k) for i in range(n + 1)] for k in range(n + 1)]


def verify_recurrence(m: int) -> bool:
    """Check ``i(m-i) v_{i,k} = (m-2k)(m-2k-1) v_{i,k+1} + k(m-k) v_{i,k}`` exactly."""
    n = m // 2
    v = cone_generators(m)
    v.append([binom(m - 2 * (n + 1), i - n - 1) for i in range(n + 1)])
    for k in range(n + 1):
        up = (m - 2 * k) * (m - 2 * k - 1)
        stay = k * (m - k)
        if up < 0 and any(v[k + 1]):
            return False
        if stay < 0 and any(v[k]):
            return False
        for i in range(n + 1):
            if i * (m - i) * v[k][i] != up * v[k + 1][i] + stay * v[k][i]:
                return False
    return True


def solve_lower_triangular(M: RationalMatrix, rhs: Sequence) -> list:
    """Forward substitution; exact for Fraction input, IEEE for floats."""
    x: list = []
    for i, row in enumerate(M.entries):
        acc = rhs[i]
        for j in range(i):
            if row[j]:
                acc = acc - _coerce(row[j], acc) * x[j]
        x.append(acc / _coerce(row[i], acc))
    return x


def _coerce(a: Fraction, like):
    return a if isinstance(like, (Fraction, int)) else float(a)


@dataclass
class WindabilityCertificate:
    m: int
    a: int
    b: int
    h: list
    x: list
    feasible: bool
    margin: float
    exact: bool = True
    log_scale: float = 0.0

    def to_dict(self) -> dict:
        def enc(v):
            if isinstance(v, Fraction):
                return str(v) if v.denominator != 1 else v.numerator
            return float(v)

        return {
            "m": self.m,
            "a": self.a,
            "b": self.b,
            "h": [enc(v) for v in self.h],
            "x": [enc(v) for v in self.x],
            "feasible": bool(self.feasible),
            "margin": enc(self.margin) if self.exact else float(self.margin),
        }


def solve_pinning(m: int, h: Sequence, a: int = 0, b: int | None = None, tol: float | None = None) -> WindabilityCertificate:
    """Solve ``A_m x = h`` for one pinning's half-vector.

    Exact when every entry of ``h`` is an int or Fraction (tolerance 0);
    otherwise float with nonnegativity tolerance ``FLOAT_TOL``.
    """
    n = m // 2
    if len(h) != n + 1:
        raise ValueError(f"half-vector for m={m} must have {n + 1} entries, got {len(h)}")
    exact = all(isinstance(v, (int, Fraction)) for v in h)
    hv = [Fraction(v) for v in h] if exact else [float(v) for v in h]
    x = solve_lower_triangular(matrix_A(m), hv)
    margin = min(x)
    if tol is None:
        tol = 0 if exact else FLOAT_TOL
    return WindabilityCertificate(m, a, m + a if b is None else b, hv, x, margin >= -tol, margin, exact)


@dataclass
class WindabilityReport:
    windable: bool
    worst: WindabilityCertificate
    certificates: list[WindabilityCertificate] = field(repr=False, default_factory=list)


def _as_exact(v):
    if isinstance(v, (int, Fraction)):
        return Fraction(v)
    return Fraction(float(v))


def pinning_half_vector(sig: Signature, a: int, b: int, exact: bool) -> tuple[list, float]:
    """Half-vector of ``H`` for pinning (a, b), plus the log of any rescaling applied."""
    g = pin(sig, a, b)
    m = b - a
    n = m // 2
    if exact:
        vals = [_as_exact(v) for v in g.values]
        return [vals[i] * vals[m - i] for i in range(n + 1)], 0.0
    lg = g.logs()
    lz = np.array([lg[i] + lg[m - i] for i in range(n + 1)])
    top = float(np.max(lz))
    if not np.isfinite(top):
        return [0.0] * (n + 1), 0.0
    return list(np.exp(lz - top)), top


def is_windable(sig: Signature, mode: str = "float") -> WindabilityReport:
    """Certify ``sig`` over all pinnings with arity ``1 <= m <= d``.

    ``mode="exact"`` turns every entry into an exact rational (floats are
    converted without rounding); ``mode="float"`` works from log values and
    rescales each half-vector to a maximum of 1, which does not change the
    sign pattern of the solution.
    """
    if mode not in ("exact", "float"):
        raise ValueError("mode must be 'exact' or 'float'")
    exact = mode == "exact"
    d = sig.arity
    certs = []
    for m in range(1, d + 1):
        for a in range(0, d - m + 1):
            b = a + m
            h, log_scale = pinning_half_vector(sig, a, b, exact)
            cert = solve_pinning(m, h, a, b)
            cert.log_scale = log_scale
            certs.append(cert)
    if not certs:
        # arity 0: no pinning to check
        cert = WindabilityCertificate(0, 0, 0, [], [], True, math.inf, exact)
        return WindabilityReport(True, cert, [])
    worst = min(certs, key=lambda c: c.margin)
    return WindabilityReport(all(c.feasible for c in certs), worst, certs)


def z_vector(m: int, h: Sequence) -> list:
    return [binom(m, i) * h[i] for i in range(len(h))]


def cone_expansion(beta: float, m: int, order: int) -> np.ndarray:
    """Coefficients on ``v_0..v_n`` of the Taylor truncation of ``z(h)``, h from ``F_{beta,m}``.

    Term j of the series is ``beta^j / j!`` times the vector
    ``(i(m-i))^j C(m, i)``; that vector is carried as exact integer
    coefficients, advanced by ``v_k -> (m-2k)(m-2k-1) v_{k+1} + k(m-k) v_k``.
    """
    n = m // 2
    c = [1] + [0] * n
    total = np.zeros(n + 1)
    weight = 1.0
    for j in range(order + 1):
        if j:
            weight *= beta / j
            nxt = [0] * (n + 1)
            for k, ck in enumerate(c):
                if not ck:
                    continue
                nxt[k] += k * (m - k) * ck
                up = (m - 2 * k) * (m - 2 * k - 1)
                if up:
                    nxt[k + 1] += up * ck
            c = nxt
        total += weight * np.array([float(ck) for ck in c])
    return total


def verify_cone_membership(beta: float, m: int, order: int, rtol: float = 1e-8) -> bool:
    """Nonnegative expansion of ``z(h)`` over the ``v_k``, checked against direct evaluation."""
    if beta < 0 or order < 1:
        raise ValueError("need beta >= 0 and order >= 1")
    coef = cone_expansion(beta, m, order)
    if np.any(coef < 0):
        return False
    V = np.array(cone_generators(m), dtype=float).T
    n = m // 2
    direct = np.array([binom(m, i) * math.exp(beta * i * (m - i)) for i in range(n + 1)])
    return bool(np.allclose(V @ coef, direct, rtol=rtol, atol=0))


def ising_windability(beta: float, mu: float, d: int, mode: str = "float") -> WindabilityReport:
    return is_windable(ising_signature(beta, mu, d), mode)


def pinning_log_scale(beta: float, mu: float, d: int, a: int, b: int) -> float:
    """Log of the constant K with ``H = K * F_{2 beta, b-a}`` for pinning (a, b) of ``F_{beta,mu,d}``."""
    return beta * (a * (d - a) + b * (d - b)) + mu * (a + b)


def complement_half(sig: Signature, a: int, b: int) -> Signature:
    return complement_product(pin(sig, a, b))
