"""Gaussian binomial coefficients and the norms they control.

Polynomials in q are dense coefficient lists, lowest degree first, with
exact integer or Fraction entries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Optional

import numpy as np

from .core import RingElement


class NotPolynomialError(ArithmeticError):
    """An exact division left a nonzero remainder."""


class PreconditionError(ValueError):
    pass


# ---------------------------------------------------------------- dense polynomial helpers


def trim(p: list) -> list:
    p = list(p)
    while len(p) > 1 and p[-1] == 0:
        p.pop()
    return p or [0]


def poly_add(p: list, r: list) -> list:
    n = max(len(p), len(r))
    return trim([(p[i] if i < len(p) else 0) + (r[i] if i < len(r) else 0) for i in range(n)])


def poly_mul(p: list, r: list) -> list:
    out = [0] * (len(p) + len(r) - 1)
    for i, a in enumerate(p):
        if a:
            for j, b in enumerate(r):
                out[i + j] += a * b
    return trim(out)


def one_minus_q_power(m: int) -> list:
    """1 - q^m for m >= 1."""
    p = [0] * (m + 1)
    p[0] = 1
    p[m] = -1
    return p


def poly_divexact(p: list, d: list) -> list:
    """Quotient p / d, raising NotPolynomialError on a nonzero remainder.

    Ascending long division; d must have a nonzero constant term.
    """
    p = trim(p)
    d = trim(d)
    if d[0] == 0:
        raise ZeroDivisionError("divisor needs a nonzero constant term")
    if p == [0]:
        return [0]
    qlen = len(p) - len(d) + 1
    if qlen <= 0:
        raise NotPolynomialError("not a polynomial: divisor degree exceeds dividend degree")
    sparse = [(i, c) for i, c in enumerate(d) if i and c]
    d0 = d[0]
    rem = list(p)
    q = [0] * qlen
    for j in range(qlen):
        c = rem[j]
        if c:
            if d0 == 1:
                qj = c
            elif isinstance(c, int) and c % d0 == 0:
                qj = c // d0
            else:
                qj = Fraction(c) / d0
            q[j] = qj
            for i, di in sparse:
                rem[j + i] -= di * qj
            rem[j] = 0
    if any(rem[qlen:]):
        raise NotPolynomialError("not a polynomial: nonzero remainder")
    return trim(q)


def l1(p) -> int:
    return sum(abs(c) for c in p)


def times_one_minus_q(p: list, m: int = 1) -> list:
    """p * (1 - q)^m."""
    for _ in range(m):
        p = [(p[i] if i < len(p) else 0) - (p[i - 1] if i >= 1 else 0) for i in range(len(p) + 1)]
    return trim(p)


# ---------------------------------------------------------------- Gaussian binomials


@lru_cache(maxsize=4096)
def _qbinom_cached(n: int, k: int) -> tuple:
    if k < 0 or k > n:
        return (0,)
    k = min(k, n - k)
    p = [1]
    for i in range(k):
        p = poly_mul(p, one_minus_q_power(n - i))
        p = poly_divexact(p, one_minus_q_power(i + 1))
    return tuple(p)


def qbinom(n: int, k: int) -> list:
    """Coefficient list of the Gaussian binomial [n k] in q.

    Computed as the product of (1 - q^(n-i)) / (1 - q^(i+1)) for i < k,
    each division exact.
    """
    if n < 0:
        raise PreconditionError("n must be nonnegative")
    return list(_qbinom_cached(n, k))


def qbinom_rows(n_max: int):
    """Yield (n, [[n 0], ..., [n n]]) for n = 0..n_max via [n k] = [n-1 k-1] + q^k [n-1 k]."""
    row = [[1]]
    yield 0, row
    for m in range(1, n_max + 1):
        new = []
        for k in range(m + 1):
            out = [0] * (k * (m - k) + 1)
            if k >= 1:
                for i, c in enumerate(row[k - 1]):
                    out[i] += c
            if k < m:
                for i, c in enumerate(row[k]):
                    out[i + k] += c
            new.append(out)
        row = new
        yield m, row


def qbinom_row(n: int) -> list:
    """All [n k] for 0 <= k <= n."""
    for m, row in qbinom_rows(n):
        if m == n:
            return row
    raise PreconditionError("n must be nonnegative")


def expand_xy_power(n: int) -> RingElement:
    """(x + y)^n in normal form.

    x^k y^(n-k) carries [n k] evaluated at q = z^-1, so the coefficient of
    q^j lands on (k, n - k, -j).
    """
    terms = {}
    for k, p in enumerate(qbinom_row(n)):
        for j, c in enumerate(p):
            if c:
                terms[(k, n - k, -j)] = c
    return RingElement(terms)


def a_quotient(n: int, k: int, p: Optional[int] = None, form: str = "p") -> list:
    """Exact quotients of Gaussian binomials.

    form "p":        [n k] (1 - q) / (1 - q^p)
    form "brunetti": [n k] (1 - q^d) / (1 - q^n) with d = gcd(n, k)
    """
    base = qbinom(n, k)
    if form == "p":
        if p is None or p < 1:
            raise PreconditionError("p must be a positive integer")
        return poly_divexact(times_one_minus_q(base), one_minus_q_power(p))
    if form == "brunetti":
        if n < 1:
            raise PreconditionError("n must be positive")
        d = math.gcd(n, k)
        return poly_divexact(poly_mul(base, one_minus_q_power(d)), one_minus_q_power(n))
    raise PreconditionError(f"unknown form {form!r}")


def _primes_upto(n: int) -> list:
    if n < 2:
        return []
    sieve = bytearray([1]) * (n + 1)
    sieve[0] = sieve[1] = 0
    for i in range(2, int(n**0.5) + 1):
        if sieve[i]:
            sieve[i * i :: i] = bytearray(len(sieve[i * i :: i]))
    return [i for i in range(n + 1) if sieve[i]]


def sylvester_prime(n: int, k: int) -> int:
    """Largest prime p > k dividing C(n, k); requires n >= 2k >= 2."""
    if not (n >= 2 * k >= 2):
        raise PreconditionError("need n >= 2k >= 2")
    c = math.comb(n, k)
    for p in reversed(_primes_upto(n)):
        if p <= k:
            break
        if c % p == 0:
            return p
    raise AssertionError("no prime above k divides C(n, k)")  # contradicts Sylvester's theorem


def weighted_norm(n: int, k: int, m: int) -> int:
    """l1 norm of [n k] (1 - q)^m."""
    if m not in (0, 1, 2):
        raise PreconditionError("m must be 0, 1 or 2")
    return l1(times_one_minus_q(qbinom(n, k), m))


# ---------------------------------------------------------------- norm series


def _half_rows(n_max: int):
    """Yield (n, rows) with rows[k] = [n k] as object arrays for k <= n // 2."""
    prev = [np.array([1], dtype=object)]
    yield 0, prev
    for n in range(1, n_max + 1):
        def get(k, prev=prev, n=n):
            return prev[k if k <= (n - 1) // 2 else n - 1 - k]

        cur = []
        for k in range(n // 2 + 1):
            r = np.zeros(k * (n - k) + 1, dtype=object)
            if k >= 1:
                a = get(k - 1)
                r[: a.size] += a
            if k <= n - 1:
                b = get(k)
                r[k : k + b.size] += b
            cur.append(r)
        prev = cur
        yield n, cur


@dataclass
class NormSeries:
    """Exact S(n), T(n) and dyadic block sums of T."""

    S: list
    T: list
    blocks: dict = field(default_factory=dict)

    @property
    def partial_sums(self) -> list:
        out, acc = [], Fraction(0)
        for t in self.T:
            acc += t
            out.append(acc)
        return out

    def decreasing_from(self, j0: int) -> bool:
        js = sorted(j for j in self.blocks if j >= j0)
        return all(self.blocks[j] > self.blocks[j + 1] for j in js if j + 1 in self.blocks)


def norm_series(n_max: int) -> NormSeries:
    """S(n) = sum_k ||[n k](1-q)||_1 and T(n) = 2^-(n+1) sum_k ||[n k](1-q)^2||_1.

    blocks[j] sums T(n) over 2^j < n <= 2^(j+1), for complete blocks only.
    """
    S, T = [], []
    for n, rows in _half_rows(n_max):
        s1 = s2 = 0
        for k, p in enumerate(rows):
            d1 = np.zeros(p.size + 1, dtype=object)
            d1[: p.size] += p
            d1[1:] -= p
            d2 = np.zeros(p.size + 2, dtype=object)
            d2[: p.size + 1] += d1
            d2[1:] -= d1
            w = 1 if 2 * k == n else 2
            s1 += w * int(np.abs(d1).sum())
            s2 += w * int(np.abs(d2).sum())
        S.append(s1)
        T.append(Fraction(s2, 2 ** (n + 1)))
    blocks = {}
    j = 0
    while 2 ** (j + 1) <= n_max:
        blocks[j] = sum(T[2**j + 1 : 2 ** (j + 1) + 1], Fraction(0))
        j += 1
    return NormSeries(S, T, blocks)


# ---------------------------------------------------------------- conjecture search


@dataclass
class ConjectureEvidence:
    n: int
    k: int
    m: Optional[int]
    attempts: list  # (m, outcome) with outcome "ok", "not a polynomial" or "negative coefficient"

    @property
    def found(self) -> bool:
        return self.m is not None


def conjecture_search(n: int, k: int) -> ConjectureEvidence:
    """Look for m in [n-k, n) making
    [n k](1-q)/(1-q^n) * (1-q)^2/(1-q^m) a polynomial with nonnegative coefficients.

    Reports evidence only.
    """
    if not (n >= 2 * k >= 2) or math.gcd(n, k) != 1:
        raise PreconditionError("need n >= 2k >= 2 and gcd(n, k) = 1")
    base = poly_divexact(times_one_minus_q(qbinom(n, k)), one_minus_q_power(n))
    base = times_one_minus_q(base, 2)
    attempts = []
    for m in range(n - k, n):
        try:
            quotient = poly_divexact(base, one_minus_q_power(m))
        except NotPolynomialError:
            attempts.append((m, "not a polynomial"))
            continue
        if all(c >= 0 for c in quotient):
            attempts.append((m, "ok"))
            return ConjectureEvidence(n, k, m, attempts)
        attempts.append((m, "negative coefficient"))
    return ConjectureEvidence(n, k, None, attempts)


def conjecture_table(n_max: int) -> list:
    rows = []
    for n in range(2, n_max + 1):
        for k in range(1, n // 2 + 1):
            if math.gcd(n, k) == 1:
                rows.append(conjecture_search(n, k))
    return rows
