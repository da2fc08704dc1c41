"""Witnesses of noninvertibility.

A character (x, y, z) -> (zeta1, zeta2, 1) or a finite-dimensional unitary
representation killing f shows that f is not invertible in l1, so the
action is not expansive.  Searches try roots of unity first and fall back to
a grid scan with local refinement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .core import RingElement
from .laurent import BivariateLaurent

CHARACTER_TOL = 1e-9
DET_TOL = 1e-8
COMMUTATION_TOL = 1e-12
EXACT_ORDER = 12

_GOLDEN = (math.sqrt(5) - 1) / 2


def roots_of_unity_angles(max_order: int = EXACT_ORDER) -> list:
    """Distinct fractions a/p in [0, 1) with p <= max_order, sorted."""
    return sorted({Fraction(a, p) for p in range(1, max_order + 1) for a in range(p)})


def _turn(s) -> complex:
    return complex(np.exp(2j * np.pi * float(s)))


def _golden_min(fn, lo: float, hi: float, iters: int) -> float:
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = fn(c), fn(d)
    for _ in range(iters):
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = fn(d)
    return (a + b) / 2


def _refine(value_fn, s1: float, s2: float, width: float, steps: int):
    """Golden-section sweeps on each angle, then a 2x2 Newton polish on (Re, Im)."""
    modulus = lambda u, v: abs(value_fn(u, v))  # noqa: E731
    w = width
    for _ in range(steps):
        s1 = _golden_min(lambda u: modulus(u, s2), s1 - w, s1 + w, 12)
        s2 = _golden_min(lambda v: modulus(s1, v), s2 - w, s2 + w, 12)
        w *= 0.25
        if w < 1e-13:
            break
    h = 1e-7
    for _ in range(30):
        val = value_fn(s1, s2)
        if abs(val) < 1e-15:
            break
        d1 = (value_fn(s1 + h, s2) - value_fn(s1 - h, s2)) / (2 * h)
        d2 = (value_fn(s1, s2 + h) - value_fn(s1, s2 - h)) / (2 * h)
        J = np.array([[d1.real, d2.real], [d1.imag, d2.imag]])
        step = np.linalg.lstsq(J, -np.array([val.real, val.imag]), rcond=None)[0]
        n1, n2 = s1 + step[0], s2 + step[1]
        if abs(value_fn(n1, n2)) >= abs(val):
            break
        s1, s2 = n1, n2
    return s1 % 1.0, s2 % 1.0


def _seeds(vals: np.ndarray, count: int) -> list:
    """Flat indices of the smallest periodic local minima worth refining.

    A sampled minimum far above the typical size of the function rarely hides
    a zero; seeds above a tenth of the median are dropped.  This only prunes
    the search, witnesses are always validated by their residual.
    """
    v = np.asarray(vals)
    is_min = np.ones(v.shape, dtype=bool)
    for axis in range(v.ndim):
        for shift in (1, -1):
            is_min &= v <= np.roll(v, shift, axis=axis)
    cutoff = 0.1 * float(np.median(v))
    flat = v.ravel()
    order = [int(i) for i in np.argsort(flat, kind="stable") if is_min.ravel()[i] and flat[i] <= cutoff]
    return order[:count]


# ---------------------------------------------------------------- characters


@dataclass
class CharacterWitness:
    zeta1: complex
    zeta2: complex
    angles: tuple  # (s1, s2) with zeta = exp(2 pi i s)
    residual: float
    exact: bool  # found among roots of unity

    def to_json(self) -> dict:
        return {
            "kind": "character",
            "p": 1,
            "theta": [1.0, 0.0],
            "zeta1": [self.zeta1.real, self.zeta1.imag],
            "zeta2": [self.zeta2.real, self.zeta2.imag],
            "residual": self.residual,
        }


def abelianization(f: RingElement) -> dict:
    out: dict = {}
    for (k, l, _), v in f.raw_items():
        out[(k, l)] = out.get((k, l), 0) + v
    return {k: v for k, v in out.items() if v != 0}


def _char_eval(terms: dict, s1, s2):
    s1 = np.asarray(s1, dtype=float)
    s2 = np.asarray(s2, dtype=float)
    out = np.zeros(np.broadcast(s1, s2).shape, dtype=complex)
    for (k, l), v in terms.items():
        out = out + complex(v) * np.exp(2j * np.pi * (k * s1 + l * s2))
    return out


def character_witness(f: RingElement, grid: int = 64, refine_steps: int = 12) -> Optional[CharacterWitness]:
    """Point of the 2-torus where f with z -> 1 vanishes, if one is found."""
    terms = abelianization(f)
    if not terms:
        return CharacterWitness(1, 1, (0.0, 0.0), 0.0, True)
    angles = roots_of_unity_angles()
    A = np.array([float(a) for a in angles])
    vals = np.abs(_char_eval(terms, A[:, None], A[None, :]))
    hits = np.argwhere(vals < CHARACTER_TOL)
    if hits.size:
        i, j = hits[0]
        s1, s2 = angles[i], angles[j]
        return CharacterWitness(_turn(s1), _turn(s2), (s1, s2), float(vals[i, j]), True)

    g = np.arange(grid) / grid
    vals = np.abs(_char_eval(terms, g[:, None], g[None, :]))
    fn = lambda u, v: complex(_char_eval(terms, u, v))  # noqa: E731
    for idx in _seeds(vals, 8):
        i, j = divmod(int(idx), grid)
        s1, s2 = _refine(fn, g[i], g[j], 1.0 / grid, refine_steps)
        res = abs(fn(s1, s2))
        if res < CHARACTER_TOL:
            return CharacterWitness(_turn(s1), _turn(s2), (s1, s2), res, False)
    return None


# ---------------------------------------------------------------- monomial representations


@dataclass
class RepWitness:
    p: int
    theta_angle: Fraction  # theta = exp(2 pi i r / p)
    angles: tuple
    residual: float  # |det pi(f)|
    commutation_error: float
    exact: bool

    @property
    def theta(self) -> complex:
        return _turn(self.theta_angle)

    @property
    def zeta1(self) -> complex:
        return _turn(self.angles[0])

    @property
    def zeta2(self) -> complex:
        return _turn(self.angles[1])

    def to_json(self) -> dict:
        t, z1, z2 = self.theta, self.zeta1, self.zeta2
        return {
            "kind": "representation",
            "p": self.p,
            "theta": [t.real, t.imag],
            "zeta1": [z1.real, z1.imag],
            "zeta2": [z2.real, z2.imag],
            "residual": self.residual,
        }


def rep_generators(p: int, theta: complex, zeta1: complex, zeta2: complex):
    """pi(x) = zeta1 diag(1, theta, ..., theta^(p-1)), pi(y) = zeta2 S, pi(z) = theta I.

    S sends e_j to e_(j+1 mod p), which makes pi(x) pi(y) = theta pi(y) pi(x),
    matching x y = y x z.
    """
    U = np.diag([theta**j for j in range(p)]).astype(complex)
    S = np.roll(np.eye(p, dtype=complex), 1, axis=0)
    return zeta1 * U, zeta2 * S, theta * np.eye(p, dtype=complex)


def commutation_error(p: int, theta: complex, zeta1: complex = 1, zeta2: complex = 1) -> float:
    X, Y, _ = rep_generators(p, theta, zeta1, zeta2)
    return float(np.max(np.abs(X @ Y - theta * Y @ X)))


def _term_matrices(f: RingElement, p: int, theta: complex):
    """For each term, (a, b, coefficient * theta^c, U^a S^b)."""
    U, S, _ = rep_generators(p, theta, 1, 1)
    out = []
    for (a, b, c), v in f.raw_items():
        M = np.linalg.matrix_power(U, a % p) @ np.linalg.matrix_power(S, b % p)
        out.append((a, b, complex(v) * theta**c, M))
    return out


def rep_matrix(f: RingElement, p: int, theta: complex, zeta1: complex, zeta2: complex) -> np.ndarray:
    X, Y, Zm = rep_generators(p, theta, zeta1, zeta2)
    out = np.zeros((p, p), dtype=complex)
    for (a, b, c), v in f.raw_items():
        out += complex(v) * _signed_power(X, a) @ _signed_power(Y, b) @ _signed_power(Zm, c)
    return out


def _signed_power(M: np.ndarray, e: int) -> np.ndarray:
    return np.linalg.matrix_power(M, e) if e >= 0 else np.linalg.matrix_power(np.linalg.inv(M), -e)


def _batched_det(terms, p: int, s1, s2) -> np.ndarray:
    s1 = np.asarray(s1, dtype=float).ravel()
    s2 = np.asarray(s2, dtype=float).ravel()
    M = np.zeros((s1.size, p, p), dtype=complex)
    for a, b, w, P in terms:
        coef = w * np.exp(2j * np.pi * (a * s1 + b * s2))
        M += coef[:, None, None] * P[None, :, :]
    return np.linalg.det(M)


def _witness_at(f, p, r, terms, grid, refine_steps) -> Optional[RepWitness]:
    theta_angle = Fraction(r, p)
    theta = _turn(theta_angle)
    comm = commutation_error(p, theta)
    # conjugating by S or by U multiplies zeta1 or zeta2 by theta, so angles mod 1/p suffice
    cands = [s for s in roots_of_unity_angles() if s < Fraction(1, p)]
    A = np.array([float(s) for s in cands])
    dets = np.abs(_batched_det(terms, p, np.repeat(A, len(A)), np.tile(A, len(A))))
    hit = np.argmax(dets < DET_TOL) if np.any(dets < DET_TOL) else None
    if hit is not None:
        i, j = divmod(int(hit), len(A))
        return RepWitness(p, theta_angle, (cands[i], cands[j]), float(dets[hit]), comm, True)

    g = np.arange(grid) / (grid * p)
    dets = np.abs(_batched_det(terms, p, np.repeat(g, grid), np.tile(g, grid)))
    fn = lambda u, v: complex(_batched_det(terms, p, [u], [v])[0])  # noqa: E731
    for idx in _seeds(dets.reshape(grid, grid), 4):
        i, j = divmod(int(idx), grid)
        s1, s2 = _refine(fn, g[i], g[j], 1.0 / (grid * p), refine_steps)
        res = abs(fn(s1, s2))
        if res < DET_TOL:
            return RepWitness(p, theta_angle, (s1, s2), res, comm, False)
    return None


def rep_witnesses(
    f: RingElement,
    p_max: int = 8,
    grid: int = 32,
    refine_steps: int = 12,
    p_values=None,
) -> list:
    """The first witness found for each dimension p, lowest p first."""
    found = []
    for p in p_values if p_values is not None else range(1, p_max + 1):
        for r in range(p):
            if math.gcd(r, p) != 1:
                continue
            theta = _turn(Fraction(r, p))
            terms = _term_matrices(f, p, theta)
            w = _witness_at(f, p, r, terms, grid, refine_steps)
            if w is not None and w.commutation_error < COMMUTATION_TOL:
                found.append(w)
                break
    return found


def rep_witness(f: RingElement, p_max: int = 8, grid: int = 32, refine_steps: int = 12, p_values=None):
    ws = rep_witnesses(f, p_max, grid, refine_steps, p_values)
    return ws[0] if ws else None


# ---------------------------------------------------------------- unitary varieties


@dataclass
class VarietyCheck:
    empty: bool
    min_modulus: float
    lipschitz: float
    step: float
    near_zero: tuple  # angles (s_xi, s_theta) of the smallest sampled value


def unitary_variety_empty(g: BivariateLaurent, grid: int = 256) -> VarietyCheck:
    """Certify that g has no zero on the 2-torus.

    Sampling on a uniform grid with angle step h, g is certified nonvanishing
    when the sampled minimum exceeds L h, L = sum |c| (|i| + |j|).
    """
    s = np.arange(grid) / grid
    vals = np.abs(g(np.exp(2j * np.pi * s)[:, None], np.exp(2j * np.pi * s)[None, :]))
    idx = int(np.argmin(vals))
    i, j = divmod(idx, grid)
    h = 2 * math.pi / grid
    L = g.lipschitz()
    m = float(vals[i, j])
    return VarietyCheck(m > L * h, m, L, h, (float(s[i]), float(s[j])))
