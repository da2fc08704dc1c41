"""Local invertibility over the circle of twists.

Evaluating z at a unit complex number theta sends the group ring onto a
twisted algebra on Z^2 in which (x^a y^b)(x^a' y^b') = theta^(-a' b) x^(a+a') y^(b+b').
An element is invertible in l1 of the Heisenberg group when every one of
these images is invertible.  Each image is certified either by a dominant
coefficient or by a Neumann series for a split f = A + B, and each
certificate is extended to an arc of twists through an explicit Lipschitz
bound, so a finite grid can cover the whole circle.
"""

from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass, field
from typing import Optional

from .core import RingElement

UNIT_TOL = 1e-12
MARGIN_TOL = 1e-12


class TwistError(ValueError):
    pass


def theta_at(t: float) -> complex:
    """exp(2 pi i t)."""
    if t == 0:
        return 1 + 0j
    if t == 0.5:
        return -1 + 0j
    if t == 0.25:
        return 1j
    if t == 0.75:
        return -1j
    return cmath.exp(2j * math.pi * t)


def _check_unit(theta: complex) -> complex:
    theta = complex(theta)
    if abs(abs(theta) - 1) > UNIT_TOL:
        raise TwistError(f"twist {theta} is not on the unit circle")
    return theta


class TwistedElement:
    __slots__ = ("theta", "terms")

    def __init__(self, theta: complex, terms: dict):
        self.theta = theta
        self.terms = {k: v for k, v in terms.items() if v != 0}

    def __mul__(self, other: "TwistedElement") -> "TwistedElement":
        return twisted_mul(self, other)

    def __add__(self, other: "TwistedElement") -> "TwistedElement":
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, 0) + v
        return TwistedElement(self.theta, out)

    def __sub__(self, other: "TwistedElement") -> "TwistedElement":
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, 0) - v
        return TwistedElement(self.theta, out)

    def scale(self, s) -> "TwistedElement":
        return TwistedElement(self.theta, {k: v * s for k, v in self.terms.items()})

    def norm(self) -> float:
        return sum(abs(v) for v in self.terms.values())

    def constant(self) -> complex:
        return self.terms.get((0, 0), 0j)

    def star(self) -> "TwistedElement":
        th = self.theta
        return TwistedElement(th, {(-k, -l): v.conjugate() * th ** (-k * l) for (k, l), v in self.terms.items()})

    def lift(self) -> RingElement:
        """A preimage: x^k y^l z^0 carries the (k, l) coefficient."""
        return RingElement({(k, l, 0): v for (k, l), v in self.terms.items()}, "complex")

    def __repr__(self):
        return f"TwistedElement({self.theta}, {dict(sorted(self.terms.items()))})"


def twisted_mul(f: TwistedElement, g: TwistedElement) -> TwistedElement:
    th = f.theta
    out: dict = {}
    powers: dict = {}
    for (a, b), u in f.terms.items():
        for (a2, b2), v in g.terms.items():
            e = -a2 * b
            ph = powers.get(e)
            if ph is None:
                ph = powers[e] = th**e
            key = (a + a2, b + b2)
            out[key] = out.get(key, 0) + u * v * ph
    return TwistedElement(th, out)


def project(f: RingElement, theta: complex) -> TwistedElement:
    theta = _check_unit(theta)
    out: dict = {}
    for (k, l, m), v in f.raw_items():
        out[(k, l)] = out.get((k, l), 0) + v * theta**m
    return TwistedElement(theta, {k: complex(v) for k, v in out.items()})


def twisted_one(theta: complex) -> TwistedElement:
    return TwistedElement(theta, {(0, 0): 1 + 0j})


def dominant_margin(f: RingElement, theta: complex) -> float:
    """max over (k, l) of |f_(k,l)(theta)| minus the mass of the other cells."""
    vals = [abs(v) for v in project(f, theta).terms.values()]
    if not vals:
        return 0.0
    total = sum(vals)
    return max(2 * v - total for v in vals)


def margin_lipschitz(f: RingElement) -> float:
    """Lipschitz constant of theta -> dominant margin (chord metric)."""
    return float(sum(abs(v) * abs(m) for (_, _, m), v in f.raw_items()))


# ---------------------------------------------------------------- Neumann splits


@dataclass
class SplitBound:
    theta: complex
    A: RingElement
    N: int
    c: complex  # the (0, 0) cell of A's image
    a_norm: float
    inverse_bound: float  # U, bound on ||A^-1||
    b_norm: float
    ok: bool

    @property
    def bound(self) -> float:
        return self.inverse_bound * self.b_norm


def _as_split(f: RingElement, split) -> RingElement:
    if isinstance(split, RingElement):
        return split
    keep = {tuple(g) for g in split}
    return RingElement({g: v for g, v in f.raw_items() if g in keep}, f.ring)


def _series_powers(a: TwistedElement, N: int) -> list:
    powers = [twisted_one(a.theta)]
    for _ in range(N):
        powers.append(twisted_mul(powers[-1], a))
    return powers


def neumann_split_certificate(f: RingElement, theta: complex, split, N: int = 12) -> SplitBound:
    """Certify f at theta through f = A + B with A = c + a and |c| > ||a||.

    U = sum_{n <= N} ||a^n|| / |c|^(n+1) + (||a|| / |c|)^(N+1) / (|c| - ||a||)
    bounds ||A^-1||; the certificate holds when U ||B|| < 1.
    """
    theta = _check_unit(theta)
    A = _as_split(f, split)
    pa = project(A, theta)
    c = pa.constant()
    a = TwistedElement(theta, {k: v for k, v in pa.terms.items() if k != (0, 0)})
    b_norm = project(f - A, theta).norm()
    a_norm = a.norm()
    ac = abs(c)
    if ac <= a_norm + MARGIN_TOL:
        return SplitBound(theta, A, N, c, a_norm, math.inf, b_norm, False)
    powers = _series_powers(a, N)
    U = sum(p.norm() / ac ** (n + 1) for n, p in enumerate(powers))
    U += (a_norm / ac) ** (N + 1) / (ac - a_norm)
    return SplitBound(theta, A, N, c, a_norm, U, b_norm, U * b_norm < 1 - MARGIN_TOL)


def _unit(v):
    if isinstance(v, complex):
        return v / abs(v)
    return 1 if v > 0 else -1


def split_family(f: RingElement) -> list:
    """Candidate A's: a choice of central terms plus unit (or full) parts of
    up to two noncentral terms, or of all of them."""
    items = f.items()
    central = [(g, v) for g, v in items if g[0] == 0 and g[1] == 0]
    gens = [(g, v) for g, v in items if g[0] != 0 or g[1] != 0]
    cores = []
    if f.constant_term() != 0:
        cores.append({(0, 0, 0): f.constant_term()})
    if len(central) > 1 or not cores:
        cores.append(dict(central))
    subsets = [()]
    subsets += [(i,) for i in range(len(gens))]
    subsets += list(itertools.combinations(range(len(gens)), 2))
    if len(gens) > 2:
        subsets.append(tuple(range(len(gens))))
    family, seen = [], set()
    for core in cores:
        for sub in subsets:
            for full in (False, True):
                if full and not sub:
                    continue
                terms = dict(core)
                for i in sub:
                    g, v = gens[i]
                    terms[g] = v if full else _unit(v)
                key = frozenset(terms.items())
                if key not in seen:
                    seen.add(key)
                    family.append(RingElement(terms))
    return family


# ---------------------------------------------------------------- certificates over the circle


@dataclass
class PointCertificate:
    t: float  # theta = exp(2 pi i t)
    method: str  # "dominant", "neumann-split", "covered" or "none"
    value: float  # margin for dominant, U ||B|| for a split
    radius: float  # certified arc half-width (radians)


@dataclass
class LocalizationCertificate:
    grid: int
    step: float
    lipschitz: float
    points: list
    verdict: str  # "invertible-everywhere", "noninvertible-at-theta=1" or "inconclusive"
    gaps: list = field(default_factory=list)
    abelian_zero: Optional[tuple] = None

    @property
    def min_margin(self) -> float:
        return min((p.value for p in self.points if p.method == "dominant"), default=math.nan)

    def to_json(self) -> dict:
        return {
            "theta_grid": self.grid,
            "step": self.step,
            "lipschitz": self.lipschitz,
            "per_theta": [
                {"theta": p.t, "method": p.method, "margin_or_bound": p.value, "radius": p.radius}
                for p in self.points
            ],
            "verdict": self.verdict,
            "gaps": [list(g) for g in self.gaps],
        }


def _approximate_inverse_radius(f: RingElement, sb: SplitBound) -> float:
    """Arc half-width on which an explicit approximate inverse stays good.

    b = c^-1 sum_{n<=N} (-a/c)^n approximates A^-1, hence f^-1 when U ||B|| < 1.
    With E = f lift(b) - 1 in the group ring, the twisted residual at theta'
    is at most r(theta) + |theta' - theta| sum |E_klm| |m|.
    """
    theta = sb.theta
    pa = project(sb.A, theta)
    c = sb.c
    a = TwistedElement(theta, {k: v for k, v in pa.terms.items() if k != (0, 0)})
    b = twisted_one(theta).scale(1 / c)
    term = b
    minus_a_over_c = a.scale(-1 / c)
    for _ in range(sb.N):
        term = twisted_mul(minus_a_over_c, term)
        b = b + term
    E = f.to_ring("complex") * b.lift() - RingElement.constant(1)
    r = project(E, theta).norm()
    if r >= 1:
        return 0.0
    lip = sum(abs(v) * abs(m) for (_, _, m), v in E.raw_items())
    if lip == 0:
        return math.inf
    return (1 - r) * (1 - 1e-9) / lip


def _covered_gaps(intervals: list) -> list:
    """Uncovered sub-arcs of [0, 2 pi) given (center, radius) pairs."""
    two_pi = 2 * math.pi
    pieces = []
    for c, r in intervals:
        if r <= 0:
            continue
        if r >= math.pi:
            return []
        lo, hi = c - r, c + r
        if lo < 0:
            pieces.append((lo + two_pi, two_pi))
            lo = 0.0
        if hi > two_pi:
            pieces.append((0.0, hi - two_pi))
            hi = two_pi
        pieces.append((lo, hi))
    pieces.sort()
    gaps, reach = [], 0.0
    for lo, hi in pieces:
        if lo > reach:
            gaps.append((reach, lo))
        reach = max(reach, hi)
    if reach < two_pi:
        gaps.append((reach, two_pi))
    return gaps


def certify_all_theta(
    f: RingElement,
    grid: int = 512,
    split_N: int = 12,
    max_split_points: Optional[int] = None,
) -> LocalizationCertificate:
    """Try to certify invertibility of every twisted image of f."""
    if grid < 4:
        raise ValueError("grid must have at least 4 points")
    step = 2 * math.pi / grid
    L = margin_lipschitz(f)
    ts = [i / grid for i in range(grid)]
    points = []
    for t in ts:
        m = dominant_margin(f, theta_at(t))
        if m > MARGIN_TOL:
            radius = math.inf if L == 0 else m / L
            points.append(PointCertificate(t, "dominant", m, radius))
        else:
            points.append(PointCertificate(t, "none", m, 0.0))

    family = None
    budget = grid if max_split_points is None else max_split_points
    order = sorted(range(grid), key=lambda i: (points[i].radius, i))
    for i in order:
        if budget <= 0:
            break
        p = points[i]
        if p.radius >= step:
            break
        center = 2 * math.pi * p.t
        covered = any(
            q.method == "neumann-split" and _arc_dist(center, 2 * math.pi * q.t) + step <= q.radius
            for q in points
        )
        if covered:
            continue
        if family is None:
            family = split_family(f)
        best = None
        for A in family:
            sb = neumann_split_certificate(f, theta_at(p.t), A, split_N)
            if sb.ok:
                radius = _approximate_inverse_radius(f, sb)
                if best is None or radius > best[1]:
                    best = (sb, radius)
        budget -= 1
        if best is not None and best[1] > p.radius:
            points[i] = PointCertificate(p.t, "neumann-split", best[0].bound, best[1])

    gaps = _covered_gaps([(2 * math.pi * p.t, p.radius) for p in points])
    if not gaps:
        verdict = "invertible-everywhere"
    else:
        zero = abelian_zero(f)
        verdict = "noninvertible-at-theta=1" if zero is not None else "inconclusive"
        cert = LocalizationCertificate(grid, step, L, points, verdict, gaps, zero)
        return cert
    return LocalizationCertificate(grid, step, L, points, verdict, gaps)


def _arc_dist(u: float, v: float) -> float:
    d = abs(u - v) % (2 * math.pi)
    return min(d, 2 * math.pi - d)


def abelian_zero(f: RingElement, max_order: int = 12, tol: float = 1e-12) -> Optional[tuple]:
    """A root-of-unity zero (s1, s2) of the theta = 1 image, if one exists.

    At theta = 1 the twisted algebra is l1(Z^2) and a zero of its Fourier
    transform rules out invertibility there.  Returns angles as fractions of
    a turn.
    """
    from .witnesses import roots_of_unity_angles

    img = project(f, 1)
    angles = roots_of_unity_angles(max_order)
    for s1 in angles:
        for s2 in angles:
            val = sum(v * theta_at((k * s1 + l * s2) % 1) for (k, l), v in img.terms.items())
            if abs(val) < tol:
                return (s1, s2)
    return None
