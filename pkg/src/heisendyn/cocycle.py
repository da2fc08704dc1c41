"""Linear polynomials f = g1(x, z) y + g0(x, z) and their cocycle.

For such f the function phi_theta(xi) = log |g0(xi, theta) / g1(xi, theta)|
governs expansiveness: a zero of its average over a rotation orbit, or of
its integral, signals nonexpansiveness, and the integral of
max(m(g0), m(g1)) over theta gives the entropy.  m is the logarithmic
Mahler measure in xi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .core import RingElement, swap_xy
from .laurent import BivariateLaurent, LaurentPolynomial
from .qbinomial import poly_divexact
from .witnesses import unitary_variety_empty

ON_CIRCLE_TOL = 1e-8
QUADRATURE_AGREEMENT = 1e-6
HIT_TOL = 1e-9
EXACT_DENOMINATOR = 60


class NotLinearError(ValueError):
    pass


class OrbitZeroError(ValueError):
    pass


# ---------------------------------------------------------------- decomposition


@dataclass
class LinearDecomposition:
    g0: BivariateLaurent  # coefficient (a, c) of xi^a theta^c
    g1: BivariateLaurent
    orientation: str  # "y": f y^shift = g1 y + g0;  "x": the same for the x <-> y swap of f
    shift: int

    def reconstruct(self) -> RingElement:
        terms = {}
        for (a, c), v in self.g0.coeffs.items():
            terms[(a, self.shift, c)] = v
        for (a, c), v in self.g1.coeffs.items():
            terms[(a, self.shift + 1, c)] = v
        f = RingElement(terms)
        return swap_xy(f) if self.orientation == "x" else f


def _split_levels(f: RingElement):
    levels = sorted({b for (_, b, _), _ in f.raw_items()})
    if len(levels) != 2 or levels[1] != levels[0] + 1:
        return None
    k = levels[0]
    g0, g1 = {}, {}
    for (a, b, c), v in f.raw_items():
        # (a, b, c) * y^-k = (a, b - k, c)
        (g1 if b == k + 1 else g0)[(a, c)] = v
    return BivariateLaurent(g0), BivariateLaurent(g1), k


def decompose_linear(f: RingElement) -> LinearDecomposition:
    """Write f y^-k = g1 y + g0 with g0, g1 in Z[x^+-1, z^+-1].

    The y-exponents of f must be two consecutive integers k, k + 1; failing
    that the x <-> y swap of f is tried.
    """
    parts = _split_levels(f)
    if parts is not None:
        return LinearDecomposition(parts[0], parts[1], "y", parts[2])
    parts = _split_levels(swap_xy(f))
    if parts is not None:
        return LinearDecomposition(parts[0], parts[1], "x", parts[2])
    raise NotLinearError("f is not linear in y or in x")


# ---------------------------------------------------------------- Mahler measure


def aberth_roots(coeffs, tol: float = 1e-14, max_iter: int = 500):
    """Roots of sum coeffs[i] t^i (lowest degree first) by Aberth iteration.

    Returns (roots, converged).
    """
    c = np.trim_zeros(np.asarray(coeffs, dtype=complex), "b")
    n = c.size - 1
    if n < 1:
        return np.zeros(0, dtype=complex), True
    desc = c[::-1]
    dp = np.polyder(desc)
    # start on a circle of the geometric-mean root radius, slightly rotated
    radius = abs(c[0] / c[-1]) ** (1.0 / n) if c[0] != 0 else 1.0
    radius = radius if radius > 0 else 1.0
    z = radius * np.exp(2j * np.pi * (np.arange(n) + 0.25) / n)
    for _ in range(max_iter):
        pv = np.polyval(desc, z)
        dv = np.polyval(dp, z)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = pv / dv
            diff = z[:, None] - z[None, :]
            np.fill_diagonal(diff, 1)
            inv = 1.0 / diff
            np.fill_diagonal(inv, 0)
            corr = ratio / (1 - ratio * inv.sum(axis=1))
        if not np.all(np.isfinite(corr)):
            return z, False
        z = z - corr
        if np.all(np.abs(corr) <= tol * np.maximum(1.0, np.abs(z))):
            return z, True
    return z, False


@dataclass
class MahlerEstimate:
    value: float  # Jensen's formula
    quadrature: Optional[float]
    roots_near_circle: bool
    low_confidence: bool


def _jensen(p: LaurentPolynomial):
    dense = p.dense()
    lead = dense[-1]
    roots, ok = aberth_roots(dense)
    if not ok:
        roots = np.roots(np.asarray(dense, dtype=complex)[::-1])
    mods = np.abs(roots)
    value = math.log(abs(lead)) + float(np.sum(np.log(np.maximum(1.0, mods))))
    near = bool(np.any(np.abs(mods - 1) < ON_CIRCLE_TOL))
    return value, near


def mahler_quadrature(p: LaurentPolynomial, tol: float = 1e-12, max_nodes: int = 1 << 15) -> float:
    """Midpoint rule for int_0^1 log|p(e^(2 pi i t))| dt, doubling until stable."""
    n = 64
    prev = None
    while True:
        t = (np.arange(n) + 0.5) / n
        with np.errstate(divide="ignore"):
            val = float(np.mean(np.log(np.abs(p(np.exp(2j * np.pi * t))))))
        if prev is not None and abs(val - prev) < tol or n >= max_nodes:
            return val
        prev = val
        n *= 2


def mahler_estimate(p: LaurentPolynomial, check: bool = True) -> MahlerEstimate:
    if p.is_zero():
        raise ValueError("Mahler measure of the zero polynomial")
    value, near = _jensen(p)
    quad = mahler_quadrature(p) if check else None
    low = near or (quad is not None and abs(quad - value) > QUADRATURE_AGREEMENT)
    return MahlerEstimate(value, quad, near, low)


def mahler_measure(p: LaurentPolynomial) -> float:
    """m(p) = log|leading coefficient| + sum of log max(1, |root|)."""
    return mahler_estimate(p, check=False).value


# ---------------------------------------------------------------- the cocycle


def _turn(t) -> complex:
    return complex(np.exp(2j * np.pi * float(t)))


def phi(d: LinearDecomposition, xi, theta):
    with np.errstate(divide="ignore"):
        return np.log(np.abs(d.g0(xi, theta))) - np.log(np.abs(d.g1(xi, theta)))


def atomic_orbit_test(d: LinearDecomposition, p: int, theta: complex, zeta: complex) -> float:
    """(1/p) sum_j phi_theta(zeta theta^j)."""
    pts = zeta * theta ** np.arange(p)
    v0 = np.abs(d.g0(pts, theta))
    v1 = np.abs(d.g1(pts, theta))
    if np.any(v0 < 1e-14) or np.any(v1 < 1e-14):
        raise OrbitZeroError("the orbit meets a zero of g0 g1")
    return float(np.mean(np.log(v0) - np.log(v1)))


# exact arithmetic in Z[zeta_N]


def cyclotomic_polynomial(n: int) -> list:
    num = [-1] + [0] * (n - 1) + [1]
    for d in range(1, n):
        if n % d == 0:
            num = poly_divexact(num, cyclotomic_polynomial(d))
    return num


class CyclotomicElement:
    """sum_e c_e zeta^e for a primitive N-th root zeta, exponents mod N."""

    def __init__(self, N: int, coeffs=None):
        self.N = N
        self.c = list(coeffs) if coeffs is not None else [0] * N

    @classmethod
    def power(cls, N: int, e: int, coef: int = 1) -> "CyclotomicElement":
        x = cls(N)
        x.c[e % N] = coef
        return x

    def __add__(self, other):
        return CyclotomicElement(self.N, [u + v for u, v in zip(self.c, other.c)])

    def __sub__(self, other):
        return CyclotomicElement(self.N, [u - v for u, v in zip(self.c, other.c)])

    def __mul__(self, other):
        N = self.N
        out = [0] * N
        for i, u in enumerate(self.c):
            if u:
                for j, v in enumerate(other.c):
                    if v:
                        out[(i + j) % N] += u * v
        return CyclotomicElement(N, out)

    def conjugate(self):
        N = self.N
        out = [0] * N
        for i, u in enumerate(self.c):
            out[(-i) % N] += u
        return CyclotomicElement(N, out)

    def is_zero(self) -> bool:
        phi_n = cyclotomic_polynomial(self.N)
        rem = list(self.c)
        deg = len(phi_n) - 1
        for i in range(len(rem) - 1, deg - 1, -1):
            q = rem[i]
            if q:
                for j, pc in enumerate(phi_n):
                    rem[i - deg + j] -= q * pc
        return not any(rem[:deg])


def _exact_value(g: BivariateLaurent, N: int, xi_exp: int, theta_exp: int) -> CyclotomicElement:
    out = CyclotomicElement(N)
    for (a, c), v in g.coeffs.items():
        out.c[(a * xi_exp + c * theta_exp) % N] += int(v)
    return out


def orbit_average_is_zero_exact(d: LinearDecomposition, p: int, theta_angle: Fraction, xi_angle: Fraction) -> bool:
    """Exactly decide sum_j log|g0/g1|(xi theta^j, theta) = 0 for roots of unity.

    Equivalent to prod_j |g0|^2 = prod_j |g1|^2 in Q(zeta_N); every factor must be
    nonzero.
    """
    for g in (d.g0, d.g1):
        if any(Fraction(v) != int(v) for v in g.coeffs.values()):
            raise ValueError("exact confirmation needs integer coefficients")
    N = math.lcm(theta_angle.denominator, xi_angle.denominator)
    te = int(theta_angle * N)
    xe = int(xi_angle * N)
    one = CyclotomicElement.power(N, 0)
    prods = []
    for g in (d.g0, d.g1):
        acc = one
        for j in range(p):
            w = _exact_value(g, N, xe + j * te, te)
            if w.is_zero():
                raise OrbitZeroError("the orbit meets a zero of g0 g1")
            acc = acc * w * w.conjugate()
        prods.append(acc)
    return (prods[0] - prods[1]).is_zero()


# ---------------------------------------------------------------- condition scans


@dataclass
class Condition1Result:
    crossings: list  # theta angles (turns) where m(g0) - m(g1) changes sign
    samples: list  # (t, M(t))
    precondition: tuple  # (VarietyCheck for g0, VarietyCheck for g1)

    @property
    def advisory(self) -> bool:
        return not all(v.empty for v in self.precondition)


def _mahler_gap(d: LinearDecomposition, t: float) -> float:
    th = _turn(t)
    return mahler_measure(d.g0.at_theta(th)) - mahler_measure(d.g1.at_theta(th))


def condition1_scan(d: LinearDecomposition, theta_grid: int = 512, variety_grid: int = 256) -> Condition1Result:
    pre = (unitary_variety_empty(d.g0, variety_grid), unitary_variety_empty(d.g1, variety_grid))
    ts = [i / theta_grid for i in range(theta_grid)]
    vals = [_mahler_gap(d, t) for t in ts]
    crossings = []
    for i in range(theta_grid):
        a, b = ts[i], ts[i] + 1 / theta_grid
        va, vb = vals[i], vals[(i + 1) % theta_grid]
        if va == 0:
            crossings.append(a)
        elif va * vb < 0:
            lo, hi, vlo = a, b, va
            while hi - lo > 1e-10:
                mid = (lo + hi) / 2
                vm = _mahler_gap(d, mid)
                if vm == 0:
                    lo = hi = mid
                    break
                if (vm < 0) == (vlo < 0):
                    lo, vlo = mid, vm
                else:
                    hi = mid
            crossings.append(((lo + hi) / 2) % 1.0)
    return Condition1Result(crossings, list(zip(ts, vals)), pre)


@dataclass
class CocycleHit:
    p: int
    theta_angle: Fraction
    xi_angle: float
    value: float
    exact_angle: Optional[Fraction] = None
    exact: Optional[bool] = None  # True when confirmed in exact cyclotomic arithmetic

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "theta": f"{self.theta_angle.numerator}/{self.theta_angle.denominator}",
            "xi": self.xi_angle,
            "value": self.value,
            "exact_xi": None if self.exact_angle is None else f"{self.exact_angle.numerator}/{self.exact_angle.denominator}",
            "exact": self.exact,
        }


@dataclass
class Condition2Result:
    hits: list
    precondition: tuple
    scanned: list = field(default_factory=list)  # (p, theta angle)

    @property
    def advisory(self) -> bool:
        return not all(v.empty for v in self.precondition)

    @property
    def exact_hits(self) -> list:
        return [h for h in self.hits if h.exact]


def _orbit_sum(d: LinearDecomposition, p: int, theta: complex, s):
    s = np.asarray(s, dtype=float)
    xi = np.exp(2j * np.pi * s)
    total = np.zeros(s.shape)
    for j in range(p):
        total = total + phi(d, xi * theta**j, theta)
    return total


def _confirm(d, p, theta_angle, s) -> CocycleHit:
    value = float(_orbit_sum(d, p, _turn(theta_angle), s))
    hit = CocycleHit(p, theta_angle, float(s % 1.0), value)
    snapped = Fraction(float(s % 1.0)).limit_denominator(EXACT_DENOMINATOR)
    if abs(float(snapped) - s % 1.0) < 1e-7:
        hit.exact_angle = snapped % 1
        try:
            hit.exact = orbit_average_is_zero_exact(d, p, theta_angle, snapped % 1)
        except (OrbitZeroError, ValueError):
            hit.exact = False
    return hit


def condition2_scan(
    d: LinearDecomposition, p_max: int = 8, xi_grid: int = 512, variety_grid: int = 256
) -> Condition2Result:
    """Zeros of xi -> sum_j phi_theta(xi theta^j) for primitive p-th roots theta."""
    pre = (unitary_variety_empty(d.g0, variety_grid), unitary_variety_empty(d.g1, variety_grid))
    hits, scanned = [], []
    from .witnesses import _golden_min

    for p in range(1, p_max + 1):
        for r in range(p):
            if math.gcd(r, p) != 1:
                continue
            theta_angle = Fraction(r, p)
            theta = _turn(theta_angle)
            scanned.append((p, theta_angle))
            # the orbit sum has period 1/p in the angle of xi
            s = np.arange(xi_grid) / (xi_grid * p)
            v = _orbit_sum(d, p, theta, s)
            found = []
            for i in range(xi_grid):
                a, va = s[i], v[i]
                b = a + 1 / (xi_grid * p)
                vb = v[(i + 1) % xi_grid]
                if not (np.isfinite(va) and np.isfinite(vb)):
                    continue
                if va == 0:
                    found.append(a)
                elif va * vb < 0:
                    lo, hi, vlo = a, b, va
                    while hi - lo > 1e-13:
                        mid = (lo + hi) / 2
                        vm = float(_orbit_sum(d, p, theta, mid))
                        if (vm < 0) == (vlo < 0):
                            lo, vlo = mid, vm
                        else:
                            hi = mid
                    found.append((lo + hi) / 2)
            # tangential zeros: local minima of |sum| that refine to zero
            av = np.abs(v)
            for i in range(xi_grid):
                if not np.isfinite(av[i]):
                    continue
                if av[i] <= av[i - 1] and av[i] <= av[(i + 1) % xi_grid] and av[i] < 1e-2:
                    w = 1 / (xi_grid * p)
                    c = _golden_min(lambda u: abs(float(_orbit_sum(d, p, theta, u))), s[i] - w, s[i] + w, 80)
                    if abs(float(_orbit_sum(d, p, theta, c))) < HIT_TOL:
                        found.append(c)
            seen = []
            for x in sorted(found):
                if all(abs(x - y) > 1e-7 for y in seen):
                    seen.append(x)
                    hit = _confirm(d, p, theta_angle, x)
                    if abs(hit.value) < HIT_TOL or hit.exact:
                        hits.append(hit)
    return Condition2Result(hits, pre, scanned)


# ---------------------------------------------------------------- entropy


@dataclass
class EntropyEstimate:
    value: float
    error: float  # Richardson-style estimate from halving the outer rule
    cross_check: float  # independent route: quadrature inner integrals, midpoint outer rule

    @property
    def agreement(self) -> float:
        return abs(self.value - self.cross_check)


def entropy_bound(d: LinearDecomposition, nodes: int = 256, inner_nodes: int = 512) -> EntropyEstimate:
    """int_0^1 max(m(g0(., theta)), m(g1(., theta))) over theta = exp(2 pi i t)."""
    if nodes % 2:
        raise ValueError("nodes must be even")
    ts = np.arange(nodes) / nodes
    vals = np.array(
        [max(mahler_measure(d.g0.at_theta(_turn(t))), mahler_measure(d.g1.at_theta(_turn(t)))) for t in ts]
    )
    fine = float(np.mean(vals))
    coarse = float(np.mean(vals[::2]))

    mid = (np.arange(nodes) + 0.5) / nodes
    u = (np.arange(inner_nodes) + 0.5) / inner_nodes
    xi = np.exp(2j * np.pi * u)[None, :]
    th = np.exp(2j * np.pi * mid)[:, None]
    with np.errstate(divide="ignore"):
        m0 = np.mean(np.log(np.abs(d.g0(xi, th))), axis=1)
        m1 = np.mean(np.log(np.abs(d.g1(xi, th))), axis=1)
    cross = float(np.mean(np.maximum(m0, m1)))
    return EntropyEstimate(fine, abs(fine - coarse), cross)
