from fractions import Fraction
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, strategies as st

from lineising.signatures import Signature, ising_signature
from lineising.windability import (binom, cone_expansion, cone_generators, double_factorial, is_windable,
                                   ising_windability, matrix_A, matrix_B, row_sum_constant, solve_lower_triangular,
                                   solve_pinning, verify_cone_membership, verify_recurrence, z_vector)


def pairings_with_mixed(i, m):
    """Brute-force A_m row i: count pairings (plus one singleton when m is odd) by mixed-pair count."""
    counts = {}

    def rec(items, mixed):
        if len(items) <= 1:
            counts[mixed] = counts.get(mixed, 0) + 1
            return
        if len(items) % 2 == 1:
            # choose the singleton first, then pair up the rest
            for k in range(len(items)):
                rest = items[:k] + items[k + 1:]
                pair_all(rest, mixed)
            return
        pair_all(items, mixed)

    def pair_all(items, mixed):
        if not items:
            counts[mixed] = counts.get(mixed, 0) + 1
            return
        first, rest = items[0], items[1:]
        for k, other in enumerate(rest):
            pair_all(rest[:k] + rest[k + 1:], mixed + (first != other))

    rec([0] * i + [1] * (m - i), 0)
    return counts


@pytest.mark.parametrize("m", range(1, 9))
def test_A_counts_pairings(m):
    A = matrix_A(m)
    for i in range(m // 2 + 1):
        counts = pairings_with_mixed(i, m)
        assert [A[i, j] for j in range(m // 2 + 1)] == [counts.get(j, 0) for j in range(m // 2 + 1)]


def test_small_matrices():
    assert matrix_A(3).to_numpy().tolist() == [[3, 0], [1, 2]]
    assert matrix_B(3).to_numpy().tolist() == [[1, 0], [1, 1]]
    assert matrix_A(4).to_numpy().tolist() == [[3, 0, 0], [0, 3, 0], [1, 0, 2]]
    with pytest.raises(ValueError):
        matrix_A(0)


def test_helpers():
    assert double_factorial(-1) == 1 and double_factorial(0) == 1 and double_factorial(7) == 105
    with pytest.raises(ValueError):
        double_factorial(-3)
    assert binom(3, 5) == 0 and binom(3, -1) == 0 and binom(5, 2) == 10
    assert row_sum_constant(6) == 15 and row_sum_constant(7) == 105


@pytest.mark.parametrize("m", range(1, 25))
def test_recurrence(m):
    assert verify_recurrence(m)


@given(st.integers(1, 12), st.data())
def test_exact_solve_is_exact(m, data):
    n = m // 2
    h = [Fraction(data.draw(st.integers(0, 50)), data.draw(st.integers(1, 9))) for _ in range(n + 1)]
    cert = solve_pinning(m, h)
    assert matrix_A(m).matvec(cert.x) == h
    assert cert.exact and cert.feasible == all(v >= 0 for v in cert.x)


def test_solve_lower_triangular_float():
    x = solve_lower_triangular(matrix_A(5), [1.0, 2.0, 3.0])
    assert np.allclose(matrix_A(5).to_numpy() @ x, [1, 2, 3])


def test_threshold_of_cubic_signature():
    # x_1 = (a^2 - 1/3) / 2 for the full m = 3 pinning, so the boundary is a = 3^{-1/2}
    for a, ok in [(Fraction(577, 1000), False), (Fraction(578, 1000), True), (Fraction(7, 10), True)]:
        assert is_windable(Signature((1, a, a, 1)), "exact").windable is ok
    r = is_windable(Signature((1, Fraction(1, 2), Fraction(1, 2), 1)), "exact")
    assert r.worst.m == 3 and r.worst.x == [Fraction(1, 3), Fraction(-1, 24)]


def test_all_ones_signature_windable():
    assert is_windable(Signature((1, 1, 1, 1)), "exact").windable


@pytest.mark.parametrize("beta,mu,d", [(1.0, 0.0, 6), (0.3, -1.0, 5), (5.0, 3.0, 12)])
def test_ising_windable_both_modes(beta, mu, d):
    rf = ising_windability(beta, mu, d, "float")
    assert rf.windable
    if d <= 6:
        assert ising_windability(beta, mu, d, "exact").windable
    assert len(rf.certificates) == d * (d + 1) // 2


def test_certificate_dict():
    c = solve_pinning(3, [Fraction(1), Fraction(1, 2)], a=1)
    d = c.to_dict()
    assert set(d) == {"m", "a", "b", "h", "x", "feasible", "margin"}
    assert d["x"] == ["1/3", "1/12"] and d["b"] == 4


@pytest.mark.parametrize("beta,m,order", [(1.0, 4, 30), (0.3, 5, 20), (0.7, 8, 40)])
def test_cone_membership(beta, m, order):
    assert verify_cone_membership(beta, m, order)
    assert np.all(cone_expansion(beta, m, order) >= 0)


def test_z_vector_and_generators():
    assert z_vector(4, [1, 1, 1]) == [1, 4, 6]
    assert cone_generators(4) == [[1, 4, 6], [0, 1, 2], [0, 0, 1]]


@pytest.mark.parametrize("m", range(1, 17))
def test_binomial_generators_lie_in_column_cone(m):
    B = matrix_B(m)
    for v in cone_generators(m):
        y = solve_lower_triangular(B, [Fraction(x) for x in v])
        assert B.matvec(y) == v and all(t >= 0 for t in y)


def test_margin_positive_along_beta_grid():
    for d in (3, 6, 9):
        margins = [float(ising_windability(b, 0.0, d).worst.margin) for b in np.linspace(0, 3, 13)]
        assert min(margins) > 0
