import itertools
import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from heisendyn.core import parse_poly
from heisendyn.qbinomial import (
    NotPolynomialError,
    PreconditionError,
    a_quotient,
    conjecture_search,
    conjecture_table,
    expand_xy_power,
    norm_series,
    one_minus_q_power,
    poly_divexact,
    poly_mul,
    qbinom,
    qbinom_row,
    sylvester_prime,
    weighted_norm,
)


def subset_count(n, k):
    # coefficient of q^j counts k-subsets of {0..n-1} whose sum exceeds the minimum by j
    out = [0] * (k * (n - k) + 1)
    base = k * (k - 1) // 2
    for s in itertools.combinations(range(n), k):
        out[sum(s) - base] += 1
    return out


@pytest.mark.parametrize("n", range(0, 11))
def test_qbinom_matches_subset_count(n):
    for k in range(n + 1):
        assert qbinom(n, k) == subset_count(n, k)
        assert qbinom_row(n)[k] == qbinom(n, k)


@given(st.integers(0, 30), st.data())
def test_symmetry_unimodality_value_at_one(n, data):
    k = data.draw(st.integers(0, n))
    p = qbinom(n, k)
    assert p == p[::-1]
    peak = len(p) // 2
    assert all(p[i] <= p[i + 1] for i in range(peak))
    assert sum(p) == math.comb(n, k)
    assert qbinom(n, k) == qbinom(n, n - k)


@pytest.mark.parametrize("n", [1, 2, 5, 8])
def test_xy_power_expansion(n):
    assert expand_xy_power(n) == parse_poly("x+y") ** n
    assert expand_xy_power(n).l1_norm() == 2**n


def test_divexact_rejects_remainders():
    assert poly_divexact(poly_mul([1, 2, 1], [1, -1]), [1, -1]) == [1, 2, 1]
    with pytest.raises(NotPolynomialError):
        poly_divexact([1, 1, 1], one_minus_q_power(2))


def test_a_quotient_examples():
    # [4 1] (1 - q) / (1 - q^2) = (1 + q + q^2 + q^3)(1 - q)/(1 - q^2) = 1 + q^2
    assert a_quotient(4, 1, 2) == [1, 0, 1]
    with pytest.raises(NotPolynomialError):
        a_quotient(5, 1, 2)
    for n in range(2, 20):
        for k in range(1, n):
            assert sum(a_quotient(n, k, form="brunetti")) * n == math.comb(n, k) * math.gcd(n, k)


def test_sylvester_prime_brute_force():
    for n in range(2, 40):
        for k in range(1, n // 2 + 1):
            c = math.comb(n, k)
            best = max(p for p in range(k + 1, n + 1) if c % p == 0 and all(p % d for d in range(2, p)))
            assert sylvester_prime(n, k) == best
    with pytest.raises(PreconditionError):
        sylvester_prime(3, 2)


def _T_direct(n):
    f = parse_poly("x+y") ** n * parse_poly("1 - z^-1") ** 2
    return Fraction(f.l1_norm(), 2 ** (n + 1))


def _S_direct(n):
    return (parse_poly("x+y") ** n * parse_poly("1 - z^-1")).l1_norm()


def test_norm_series_against_ring_powers():
    ns = norm_series(10)
    for n in range(11):
        assert ns.T[n] == _T_direct(n)
        assert ns.S[n] == _S_direct(n)


def test_norm_series_frozen_values():
    ns = norm_series(16)
    assert ns.S[:9] == [2, 4, 6, 8, 12, 16, 26, 40, 64]
    assert ns.T[0] == 2 and ns.T[2] == Fraction(3, 2) and ns.T[8] == Fraction(11, 64)
    assert ns.blocks[0] == ns.T[2] and ns.blocks[1] == ns.T[3] + ns.T[4]
    assert ns.partial_sums[2] == Fraction(11, 2)


def test_weighted_norm():
    assert weighted_norm(4, 2, 0) == 6
    assert weighted_norm(2, 1, 1) == 2
    assert sum(weighted_norm(6, k, 2) for k in range(7)) == 2**7 * norm_series(6).T[6]


def test_conjecture_search_reports_evidence():
    ev = conjecture_search(7, 2)
    assert not ev.found
    assert [m for m, _ in ev.attempts] == [5, 6]
    assert all(outcome in ("not a polynomial", "negative coefficient", "ok") for _, outcome in ev.attempts)
    rows = conjecture_table(12)
    assert all(math.gcd(r.n, r.k) == 1 for r in rows)
    # a nonnegative polynomial vanishing at q = 1 is zero, so nothing is ever found
    assert not any(r.found for r in rows)
    with pytest.raises(PreconditionError):
        conjecture_search(6, 2)
