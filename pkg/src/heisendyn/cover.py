"""Toppling on boxes and the symbolic cover of 2 - x^-1 - y^-1.

A configuration v with values in {0, 1, 2} is pushed into {0, 1} on the box
A_M by toppling: a site g with v_g >= 2 gives one chip to each of g x and
g y, which is v -> v - g f* for f* = 2 - x - y.  The coding map
xi(v)_g' = sum_g v_g w_(g^-1 g') mod 1 with the homoclinic kernel w is
blind to such moves, so xi(v) and xi of the stabilized configuration differ
only through the chips that crossed the boundary of A_M.
"""

from __future__ import annotations

import math
import warnings
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .core import Box, Configuration, RingElement, group_mul, torus_norm, torus_rep
from .homoclinic import HomoclinicKernel, build_kernel

F_STAR = RingElement({(0, 0, 0): 2, (1, 0, 0): -1, (0, 1, 0): -1})
F = F_STAR.star()
# (1 - z^-1)^2 = f* w; its adjoint turns x into x (1 - z^-1)^2 under act_rho
G_ADJ = RingElement({(0, 0, 0): 1, (0, 0, 1): -2, (0, 0, 2): 1})
_WRAP = 1 << 64


class TruncationWarning(UserWarning):
    pass


class OverlapError(ValueError):
    pass


class BoxRegion(Box):
    """A_M: |a| <= M, |b| <= M, |c| <= M^2."""

    def __init__(self, M: int):
        if M < 1:
            raise ValueError("M must be positive")
        self.M = M
        super().__init__((-M, M), (-M, M), (-M * M, M * M))


# ---------------------------------------------------------------- toppling


@dataclass
class TopplingResult:
    configuration: Configuration
    topplings: int
    affected: frozenset
    outside_max: int
    terminated: bool
    M: int


def topple_stabilize(v: Configuration, M: int, cap: int = 10**6, order: str = "fifo") -> TopplingResult:
    """Topple sites of A_M holding at least two chips until none is left.

    Sites are first queued in lexicographic order; order "fifo" then
    processes the queue first-in first-out, "lifo" last-in first-out.
    Sites outside A_M only receive chips.
    """
    if order not in ("fifo", "lifo"):
        raise ValueError("order must be fifo or lifo")
    box = BoxRegion(M)
    vals = dict(v.values)
    queue = deque(g for g in sorted(vals) if g in box and vals[g] >= 2)
    queued = set(queue)
    pop = queue.popleft if order == "fifo" else queue.pop
    affected = set()
    count = 0
    while queue and count < cap:
        g = pop()
        queued.discard(g)
        if vals.get(g, 0) < 2:
            continue
        a, b, c = g
        vals[g] -= 2
        count += 1
        affected.add(g)
        for h in ((a + 1, b, c - b), (a, b + 1, c)):
            vals[h] = vals.get(h, 0) + 1
            affected.add(h)
            if vals[h] >= 2 and h in box and h not in queued:
                queue.append(h)
                queued.add(h)
        if vals[g] >= 2 and g not in queued:
            queue.append(g)
            queued.add(g)
    terminated = not any(vals.get(g, 0) >= 2 for g in queued) if queue else True
    outside = [x for g, x in vals.items() if g not in box]
    return TopplingResult(
        Configuration(vals, v.region),
        count,
        frozenset(affected),
        max(outside, default=0),
        terminated,
        M,
    )


def random_configuration(M: int, rng: np.random.Generator, values=(0, 1, 2)) -> Configuration:
    """Uniform values on A_(M+1), which contains every site a chip can reach from A_M."""
    box = BoxRegion(M + 1)
    sites = list(box)
    draws = rng.choice(np.asarray(values), size=len(sites))
    return Configuration({g: int(x) for g, x in zip(sites, draws)})


# ---------------------------------------------------------------- kernel lookups


class ScaledKernel:
    """Kernel levels 0..L as numerators over 2^(L+1), reduced mod 2^64.

    Sums of such numerators wrap exactly modulo 2^64, hence modulo 2^(L+1),
    which is all that matters for values mod 1.
    """

    def __init__(self, kernel: HomoclinicKernel, L: int):
        if L > min(kernel.N, 62):
            raise ValueError("L must not exceed the kernel depth or 62")
        self.kernel = kernel
        self.L = L
        self.D = 1 << (L + 1)
        flat, absflat, base = [], [], []
        offsets = np.zeros((L + 1, L + 1), dtype=np.int64)
        pos = 0
        for n in range(L + 1):
            base.append(pos)
            num = kernel._num[n]
            scale = 1 << (L - n)
            ints = [int(x) * scale for x in num]
            flat.append(np.array([x % _WRAP for x in ints], dtype=np.uint64))
            absflat.append(np.array([abs(x) for x in ints], dtype=object if L > 58 else np.int64))
            offsets[n, : n + 1] = kernel._off[n]
            pos += len(num)
        self.flat = np.concatenate(flat)
        self.absflat = np.concatenate(absflat)
        self.base = np.array(base, dtype=np.int64)
        self.offsets = offsets

    def lookup(self, a, b, c):
        """(residues, absolute numerators, truncated mask) for sites (a, b, c)."""
        a, b, c = (np.asarray(t, dtype=np.int64) for t in (a, b, c))
        n = a + b
        j = -c
        valid = (a >= 0) & (b >= 0) & (j >= 0) & (j <= a * b + 2)
        ok = valid & (n <= self.L)
        trunc = valid & (n > self.L)
        res = np.zeros(a.shape, dtype=np.uint64)
        absval = np.zeros(a.shape, dtype=self.absflat.dtype)
        idx = self.base[n[ok]] + self.offsets[n[ok], a[ok]] + j[ok]
        res[ok] = self.flat[idx]
        absval[ok] = self.absflat[idx]
        return res, absval, trunc

    def entries(self):
        """Support of the kernel up to level L as integer arrays (a, b, c, level, flat index)."""
        cols = [[], [], [], [], []]
        for n in range(self.L + 1):
            for k in range(n + 1):
                size = k * (n - k) + 3
                start = int(self.base[n] + self.offsets[n, k])
                cols[0].append(np.full(size, k))
                cols[1].append(np.full(size, n - k))
                cols[2].append(-np.arange(size))
                cols[3].append(np.full(size, n))
                cols[4].append(np.arange(start, start + size))
        return tuple(np.concatenate(c).astype(np.int64) for c in cols)


def _mod_one(total: int, D: int) -> Fraction:
    return torus_rep(Fraction(int(total) % D, D))


def _convolve(sites, weights, scaled: ScaledKernel, target):
    """sum_g weight_g w_(g^-1 g') mod 1 (exact residue mod 2^(L+1)) and a truncation flag."""
    a, b, c = sites
    a2, b2, c2 = target
    da = a2 - a
    res, _, trunc = scaled.lookup(da, b2 - b, c2 - c + b * da)
    total = int(np.sum(res * weights.astype(np.uint64), dtype=np.uint64))
    return total % scaled.D, bool(trunc[weights != 0].any())


def _site_arrays(values: dict):
    keys = sorted(values)
    if not keys:
        z = np.zeros(0, dtype=np.int64)
        return (z, z, z), z
    arr = np.array(keys, dtype=np.int64)
    w = np.array([int(values[g]) for g in keys], dtype=np.int64)
    return (arr[:, 0], arr[:, 1], arr[:, 2]), w


def coding_map(v: Configuration, kernel, window, L: Optional[int] = None) -> Configuration:
    """xi(v)_g' = sum_g v_g w_(g^-1 g') mod 1 on the window, exact.

    Emits TruncationWarning when some needed kernel entry lies above level L.
    """
    scaled = kernel if isinstance(kernel, ScaledKernel) else ScaledKernel(kernel, min(kernel.N, 62) if L is None else L)
    for x in v.values.values():
        if x != int(x):
            raise ValueError("coding_map needs an integer-valued configuration")
    sites, weights = _site_arrays(v.values)
    out = {}
    truncated = False
    for g in window:
        total, t = _convolve(sites, weights, scaled, g)
        truncated |= t
        out[g] = Fraction(total, scaled.D)
    if truncated:
        warnings.warn("kernel truncation reached inside the window", TruncationWarning, stacklevel=2)
    return Configuration(out, window, torus=True)


# ---------------------------------------------------------------- the cover experiment


@dataclass
class CoverPoint:
    M: int
    topplings: int
    outside_max: int
    terminated: bool
    d: Fraction
    b: Fraction
    truncated: bool = False

    def to_json(self) -> dict:
        return {
            "M": self.M,
            "topplings": self.topplings,
            "outside_max": self.outside_max,
            "terminated": self.terminated,
            "d": self.d,
            "b": self.b,
        }


def tail_bound(M: int, window, kernel: HomoclinicKernel) -> Fraction:
    """b(M) = 4 max over g' in the window of sum_(g not in A_M) |w_(g^-1 g')|.

    Levels above L0 = 2 (M + r) + 1, r the window radius, lie entirely
    outside A_M and contribute their full mass T(n); levels above the kernel
    depth are dropped, so the value is a lower bound for the true b(M).
    """
    r = max(max(abs(t) for t in window.a_range), max(abs(t) for t in window.b_range))
    L0 = 2 * (M + r) + 1
    if L0 > kernel.N:
        raise ValueError("kernel too shallow for this M and window")
    scaled = ScaledKernel(kernel, min(L0, 58))
    L0 = scaled.L
    ha, hb, hc, _, idx = scaled.entries()
    absnum = scaled.absflat[idx]
    box = BoxRegion(M)
    far = sum(kernel.level_norms[L0 + 1 :], Fraction(0))
    best = Fraction(0)
    for a2, b2, c2 in window:
        # g = g' h^-1
        ga, gb = a2 - ha, b2 - hb
        gc = c2 - hc - ha * hb + ha * b2
        outside = ~(
            (np.abs(ga) <= M) & (np.abs(gb) <= M) & (np.abs(gc) <= box.c_range[1])
        )
        s = Fraction(int(absnum[outside].sum()), scaled.D) + far
        best = max(best, s)
    return 4 * best


def cover_distance(v: Configuration, stabilized: TopplingResult, window, scaled: ScaledKernel):
    """d(M) = max over the window of ||xi(v) - xi(v~_M)||, v~_M stabilized on A_M only."""
    box = BoxRegion(stabilized.M)
    diff = {}
    for g in stabilized.affected:
        if g in box:
            delta = v.values.get(g, 0) - stabilized.configuration.values.get(g, 0)
            if delta:
                diff[g] = delta
    sites, weights = _site_arrays(diff)
    best = Fraction(0)
    truncated = False
    for g in window:
        total, t = _convolve(sites, weights, scaled, g)
        truncated |= t
        best = max(best, torus_norm(Fraction(total, scaled.D)))
    return best, truncated


def cover_experiment(
    v: Configuration,
    M_list,
    window=None,
    kernel: Optional[HomoclinicKernel] = None,
    cap: int = 10**6,
) -> list:
    """d(M) and b(M) for each M in M_list; raises AssertionError if d(M) > b(M)."""
    M_list = list(M_list)
    if M_list != sorted(M_list):
        raise ValueError("M_list must be increasing")
    window = Box.centered(1, 1, 1) if window is None else window
    r = max(max(abs(t) for t in window.a_range), max(abs(t) for t in window.b_range))
    need = 2 * (max(M_list) + r) + 1
    if kernel is None:
        kernel = build_kernel(max(need, 8))
    scaled = ScaledKernel(kernel, min(need, kernel.N, 58))
    out = []
    for M in M_list:
        res = topple_stabilize(v, M, cap)
        d, trunc = cover_distance(v, res, window, scaled)
        b = tail_bound(M, window, kernel)
        if trunc:
            warnings.warn("kernel truncation reached inside the window", TruncationWarning, stacklevel=2)
        assert d <= b, f"d({M}) = {float(d)} exceeds b({M}) = {float(b)}"
        out.append(CoverPoint(M, res.topplings, res.outside_max, res.terminated, d, b, trunc))
    return out


# ---------------------------------------------------------------- specification


@dataclass
class PatchResult:
    configuration: Optional[Configuration]
    deviation: Fraction  # max over F1 and F2 of the distance to the targets
    level: int  # kernel depth used to dilate the regions
    dilated_sizes: tuple = field(default=(0, 0))


def dilation_level(eps, kernel: HomoclinicKernel, f_norm: int = 4) -> int:
    """Smallest L with 2 ||f||_1 (kernel mass above level L) < eps.

    Mass above the kernel depth N is estimated as N T(N).
    """
    norms = kernel.level_norms
    N = kernel.N
    beyond = N * norms[N]
    for L in range(N + 1):
        tail = sum(norms[L + 1 :], Fraction(0)) + beyond
        if 2 * f_norm * tail < eps:
            return L
    raise ValueError("eps too small for the kernel depth")


def _dilate(region, entries) -> set:
    ha, hb, hc = entries
    out = set()
    for a2, b2, c2 in region:
        ga = a2 - ha
        gb = b2 - hb
        gc = c2 - hc - ha * hb + ha * b2
        out.update(zip(ga.tolist(), gb.tolist(), gc.tolist()))
    return out


def _integer_lift(x: Configuration, sites) -> dict:
    """v = x~ f* on the given sites, x~ the representative of x in [-1/2, 1/2)."""
    v = {}
    for g in sites:
        s = 0
        for h, c in F.raw_items():
            s += c * torus_rep(x[group_mul(g, h)])
        r = round(s)
        if r:
            v[g] = r
    return v


def specification_patch(
    x1: Configuration,
    x2: Configuration,
    F1: Box,
    F2: Box,
    eps,
    kernel: Optional[HomoclinicKernel] = None,
) -> PatchResult:
    """A point of X_f close to x1 (1 - z^-1)^2 on F1 and to x2 (1 - z^-1)^2 on F2.

    x1, x2 must be known on the dilated regions and their f-stencils; lookups
    outside raise BoundaryUnknown.
    """
    kernel = build_kernel(64) if kernel is None else kernel
    eps = Fraction(eps)
    L = dilation_level(eps, kernel)
    scaled = ScaledKernel(kernel, min(kernel.N, 58))
    ha, hb, hc, lev, _ = scaled.entries()
    keep = lev <= L
    ent = (ha[keep], hb[keep], hc[keep])
    D1, D2 = _dilate(F1, ent), _dilate(F2, ent)
    if D1 & D2:
        raise OverlapError("dilated regions overlap")
    v = _integer_lift(x1, D1)
    v.update(_integer_lift(x2, D2))
    sites, weights = _site_arrays(v)
    y = {}
    worst = Fraction(0)
    for F_j, x in ((F1, x1), (F2, x2)):
        for g in F_j:
            total, _ = _convolve(sites, weights, scaled, g)
            y[g] = Fraction(total, scaled.D)
            target = sum((c * torus_rep(x[group_mul(g, h)]) for h, c in G_ADJ.raw_items()), Fraction(0))
            worst = max(worst, torus_norm(y[g] - target))
    conf = Configuration(y, None, torus=True) if worst < eps else None
    return PatchResult(conf, worst, L, (len(D1), len(D2)))


# ---------------------------------------------------------------- entropy of the full shift


def shift_entropy_count(M: int) -> float:
    """log |P_(A_M)(Sigma_2)| / |A_M| for the full shift on {0, 1}."""
    if not 1 <= M <= 4:
        raise ValueError("M must lie in 1..4")
    n = len(BoxRegion(M))
    patterns = 2**n
    return math.log2(patterns) / n * math.log(2)
