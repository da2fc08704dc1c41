"""The homoclinic kernel of 2 - x^-1 - y^-1 and the inverse of 3 + x + y + z.

The kernel is

    w = sum_{n >= 0} 2^-(n+1) (x + y)^n (1 - z^-1)^2,

the formal inverse of 2 - x - y multiplied by (1 - z^-1)^2.  Level n lives on
the sites (k, n - k, -j) with 0 <= j <= k (n - k) + 2.  Everything here is
exact: the kernel has dyadic rational coefficients.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .core import Box, Configuration, Region, RingElement, act_rho, group_mul, torus_norm
from .qbinomial import qbinom_rows, times_one_minus_q

DEFAULT_LEVELS = 64


class WindowError(ValueError):
    pass


class HomoclinicKernel:
    """Truncated kernel w^(N) with levels stored as flat integer arrays.

    Level n holds numerators over the denominator 2^(n+1); the entries for a
    given k are the coefficients of q^j in [n k](1 - q)^2, q = z^-1.
    """

    def __init__(self, n_levels: int, numerators: list, offsets: list):
        self.N = n_levels
        self._num = numerators
        self._off = offsets
        self.level_norms = [
            Fraction(int(np.abs(num).sum()), 2 ** (n + 1)) for n, num in enumerate(numerators)
        ]

    @property
    def norm(self) -> Fraction:
        return sum(self.level_norms, Fraction(0))

    def coefficient(self, g) -> Fraction:
        a, b, c = g
        n = a + b
        if a < 0 or b < 0 or n > self.N:
            return Fraction(0)
        j = -c
        if j < 0 or j > a * b + 2:
            return Fraction(0)
        return Fraction(int(self._num[n][self._off[n][a] + j]), 2 ** (n + 1))

    def level(self, n: int) -> RingElement:
        terms = {}
        den = 2 ** (n + 1)
        num = self._num[n]
        for k in range(n + 1):
            start = self._off[n][k]
            for j in range(k * (n - k) + 3):
                v = int(num[start + j])
                if v:
                    terms[(k, n - k, -j)] = Fraction(v, den)
        return RingElement(terms, "rational")

    def element(self, max_level: Optional[int] = None) -> RingElement:
        top = self.N if max_level is None else min(max_level, self.N)
        terms = {}
        for n in range(top + 1):
            terms.update(self.level(n).raw_items())
        return RingElement(terms, "rational")

    def entries(self, max_level: Optional[int] = None):
        """Integer arrays (a, b, c, numerator, level) for levels <= max_level."""
        top = self.N if max_level is None else min(max_level, self.N)
        cols = [[], [], [], [], []]
        for n in range(top + 1):
            num = self._num[n]
            for k in range(n + 1):
                start = self._off[n][k]
                size = k * (n - k) + 3
                vals = num[start : start + size]
                nz = np.nonzero(vals)[0]
                cols[0].append(np.full(nz.size, k))
                cols[1].append(np.full(nz.size, n - k))
                cols[2].append(-nz)
                cols[3].append(vals[nz])
                cols[4].append(np.full(nz.size, n))
        return tuple(np.concatenate(c) for c in cols)

    def dump(self) -> str:
        """One line per nonzero coefficient: "(a,b,c) num/den", sorted by site."""
        lines = []
        for g, v in self.element().items():
            lines.append(f"({g[0]},{g[1]},{g[2]}) {v.numerator}/{v.denominator}")
        return "\n".join(lines) + "\n"


def build_kernel(n_levels: int = DEFAULT_LEVELS) -> HomoclinicKernel:
    if n_levels < 0:
        raise ValueError("N must be nonnegative")
    numerators, offsets = [], []
    for n, row in qbinom_rows(n_levels):
        chunks, off, pos = [], [], 0
        for k, p in enumerate(row):
            d = times_one_minus_q(p, 2)
            d = d + [0] * (k * (n - k) + 3 - len(d))
            off.append(pos)
            pos += len(d)
            chunks.extend(d)
        big = max(abs(v) for v in chunks) >= 2**62
        numerators.append(np.array(chunks, dtype=object if big else np.int64))
        offsets.append(off)
    return HomoclinicKernel(n_levels, numerators, offsets)


def boundary_mass(kernel_or_norms, n_levels: int) -> Fraction:
    """l1 mass of w^(N) (2 - x - y) - (1 - z^-1)^2, which sits on level N + 1.

    It equals 2 T(N + 1); the argument supplies T up to N + 1.
    """
    norms = kernel_or_norms.level_norms if isinstance(kernel_or_norms, HomoclinicKernel) else kernel_or_norms
    return 2 * norms[n_levels + 1]


def homoclinic_point(kernel: HomoclinicKernel, window: Box) -> Configuration:
    """w mod 1 on the window, as a torus-valued configuration."""
    values = {}
    a0, a1 = window.a_range
    b0, b1 = window.b_range
    for a in range(max(a0, 0), a1 + 1):
        for b in range(max(b0, 0), b1 + 1):
            if a + b > kernel.N:
                raise WindowError("window reaches beyond the truncation level")
            for j in range(a * b + 3):
                g = (a, b, -j)
                if g in window:
                    v = kernel.coefficient(g)
                    if v:
                        values[g] = v
    return Configuration(values, window, torus=True)


def _box_interior_contains(base: Box, window: Box, stencil) -> bool:
    for sa, sb, sc in stencil:
        if window.a_range[0] + sa < base.a_range[0] or window.a_range[1] + sa > base.a_range[1]:
            return False
        if window.b_range[0] + sb < base.b_range[0] or window.b_range[1] + sb > base.b_range[1]:
            return False
        shifts = [sa * window.b_range[0], sa * window.b_range[1]]
        if window.c_range[0] + sc - max(shifts) < base.c_range[0]:
            return False
        if window.c_range[1] + sc - min(shifts) > base.c_range[1]:
            return False
    return True


def membership_defect(x: Configuration, f: RingElement, window: Region):
    """max over the window of ||(rho^f x)_g||, distances to Z.

    Returns (defect, site attaining it).  Every window site must have its
    f-stencil inside the region where x is known.
    """
    stencil = [s for s, _ in f.raw_items()]
    if x.region is not None:
        if isinstance(x.region, Box) and isinstance(window, Box):
            inside = _box_interior_contains(x.region, window, stencil)
        else:
            inside = all(group_mul(g, s) in x.region for g in window for s in stencil)
        if not inside:
            raise WindowError("window stencil leaves the known region")
    image = act_rho(f, x)
    best, where = 0, None
    for g, v in image.values.items():
        if g in window:
            d = torus_norm(v)
            if d > best or (d == best and where is not None and g < where):
                best, where = d, g
    return best, where


def decay_profile(w, r_max: Optional[int] = None) -> list:
    """sigma(r) = sum of |w_g| over sites with |a| + |b| = r."""
    if isinstance(w, HomoclinicKernel):
        top = w.N if r_max is None else min(r_max, w.N)
        return list(w.level_norms[: top + 1])
    sig: dict = {}
    for (a, b, _), v in w.raw_items():
        r = abs(a) + abs(b)
        sig[r] = sig.get(r, 0) + abs(v)
    top = max(sig, default=0) if r_max is None else r_max
    return [sig.get(r, 0) for r in range(top + 1)]


# ---------------------------------------------------------------- 3 + x + y + z


def central_power_inverse(k: int, K: int) -> RingElement:
    """Partial sum up to z^K of (3 + z)^-k = sum_n (-1)^n C(n+k-1, n) 3^-(n+k) z^n."""
    return RingElement(
        {(0, 0, n): Fraction((-1) ** n * math.comb(n + k - 1, n), 3 ** (n + k)) for n in range(K + 1)},
        "rational",
    )


@dataclass
class NegativeBinomialNorm:
    k: int
    K: int
    partial: Fraction
    tail: Fraction

    @property
    def total(self) -> Fraction:
        return self.partial + self.tail


def central_inverse_norm(k: int, K: int = 32) -> NegativeBinomialNorm:
    """||(3 + z)^-k||_1 as an exact partial sum plus an exact tail.

    The tail uses P(NegBin > K) = P(Bin(K + k, 2/3) < k), which needs no
    summation of the series itself.
    """
    r = Fraction(1, 3)
    p = 1 - r
    partial = sum((math.comb(n + k - 1, n) * r ** (n + k) for n in range(K + 1)), Fraction(0))
    m = K + k
    lower = sum((math.comb(m, j) * p**j * r ** (m - j) for j in range(k)), Fraction(0))
    tail = r**k * p ** (-k) * lower
    return NegativeBinomialNorm(k, K, partial, tail)


@dataclass
class SeriesInverse:
    u: RingElement
    residual: Fraction  # ||1 - f u||_1, exact
    N: int
    K: int


def inverse_3xyz(N: int = 8, K: int = 32) -> SeriesInverse:
    """u = sum_{M <= N} (-1)^M (x + y)^M (3 + z)^-(M+1), each inverse cut at z^K."""
    f = RingElement({(0, 0, 0): 3, (1, 0, 0): 1, (0, 1, 0): 1, (0, 0, 1): 1})
    terms: dict = {}
    for M, row in qbinom_rows(N):
        v = central_power_inverse(M + 1, K)
        sign = -1 if M % 2 else 1
        for k, p in enumerate(row):
            for j, c in enumerate(p):
                for (_, _, n), coef in v.raw_items():
                    key = (k, M - k, n - j)
                    terms[key] = terms.get(key, 0) + sign * c * coef
    u = RingElement(terms, "rational")
    residual = (RingElement.constant(1) - f * u).l1_norm()
    return SeriesInverse(u, Fraction(residual), N, K)
