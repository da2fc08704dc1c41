"""Deciding expansiveness of the principal action of f.

The action is expansive exactly when f is invertible in l1 of the group.
Certificates of invertibility (a dominant coefficient, a Neumann series with
residual below one, a lopsided multiple, twisted invertibility at every
theta) and witnesses against it (a finite dimensional unitary representation
killing f, an atomic orbit of the cocycle) are gathered by a ladder of
increasingly expensive tests.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .core import RingElement, format_poly, ring_mul

# ---------------------------------------------------------------- lopsidedness


class NoSeriesSeed(ValueError):
    """f has neither an invertible central part nor a nonzero constant term."""


class InvariantViolation(RuntimeError):
    """Sound evidence for and against invertibility of the same element."""

    def __init__(self, verdict: "Verdict"):
        super().__init__(f"contradictory evidence for {verdict.polynomial}")
        self.verdict = verdict


@dataclass
class Lopsided:
    site: tuple
    margin: Fraction


def lopsided_check(f: RingElement) -> Optional[Lopsided]:
    """The dominant coefficient and its exact margin over the rest, if positive."""
    if f.is_zero():
        return None
    total = f.l1_norm()
    site, value = max(f.raw_items(), key=lambda kv: (abs(kv[1]), tuple(-t for t in kv[0])))
    margin = 2 * abs(value) - total
    return Lopsided(site, Fraction(margin)) if margin > 0 else None


# ---------------------------------------------------------------- Neumann series


def _laurent_mul(p: dict, q: dict) -> dict:
    out: dict = {}
    for e, u in p.items():
        for e2, v in q.items():
            out[e + e2] = out.get(e + e2, 0) + u * v
    return {e: v for e, v in out.items() if v != 0}


class CentralInverse:
    """Truncated expansions of C^-m for a central Laurent polynomial C in z.

    C = c z^d (1 + E) with c z^d the dominant term; C^-m is expanded as
    c^-m z^-md sum_(n <= K) binom(-m, n) E^n.  Exact when C is a monomial.
    """

    def __init__(self, C: dict, K: int):
        d, c = max(C.items(), key=lambda kv: (abs(kv[1]), -kv[0]))
        if 2 * abs(c) <= sum(abs(v) for v in C.values()):
            raise NoSeriesSeed("central part has no dominant term")
        self.d, self.c = d, Fraction(c)
        E = {e - d: Fraction(v) / c for e, v in C.items() if e != d}
        self.K = 0 if not E else K
        self.powers = [{0: Fraction(1)}]
        for _ in range(self.K):
            self.powers.append(_laurent_mul(self.powers[-1], E))
        self.exact = not E

    def power(self, m: int) -> dict:
        out: dict = {}
        scale = self.c ** (-m)
        for n, P in enumerate(self.powers):
            coef = (-1) ** n * math.comb(n + m - 1, n) * scale
            for e, v in P.items():
                key = e - m * self.d
                out[key] = out.get(key, 0) + coef * v
        return {e: v for e, v in out.items() if v != 0}


@dataclass
class NeumannResult:
    u: RingElement
    residual: Fraction  # ||1 - f u||_1, exact
    N: int
    K: int
    seed: str  # "central" or "constant"

    @property
    def certifies(self) -> bool:
        return self.residual < 1


def neumann_inverse(f: RingElement, N: int = 8, K: int = 24) -> NeumannResult:
    """u = sum_(M <= N) (-R)^M C^-(M+1) with C the central part of f and R = f - C.

    When C has no dominant term the constant term alone is used as C.  The
    residual r = ||1 - f u||_1 is exact; r < 1 certifies invertibility.
    """
    if f.ring == "complex":
        raise ValueError("neumann_inverse needs exact coefficients")
    central = {c: v for (a, b, c), v in f.raw_items() if a == 0 and b == 0}
    seed = "central"
    try:
        if not central:
            raise NoSeriesSeed("no series seed")
        cinv = CentralInverse(central, K)
    except NoSeriesSeed:
        if f.constant_term() == 0:
            raise NoSeriesSeed("no series seed") from None
        seed = "constant"
        central = {0: f.constant_term()}
        cinv = CentralInverse(central, K)
    R = f - RingElement({(0, 0, c): v for c, v in central.items()})
    minus_R = R.scale(-1)
    terms: dict = {}
    P = RingElement.constant(1)
    for M in range(N + 1):
        inv = cinv.power(M + 1)
        for (a, b, c), v in P.raw_items():
            for e, w in inv.items():
                key = (a, b, c + e)
                terms[key] = terms.get(key, 0) + v * w
        if M < N:
            P = ring_mul(P, minus_R)
    u = RingElement({g: v for g, v in terms.items() if v != 0}, "rational")
    residual = Fraction((RingElement.constant(1) - ring_mul(f, u)).l1_norm())
    return NeumannResult(u, residual, N, cinv.K, seed)


@dataclass
class IdealCertificate:
    h: RingElement
    q: int
    hf: RingElement
    lopsided: Lopsided


def lopsided_ideal_search(f: RingElement, N: int = 8, K: int = 24, neumann: Optional[NeumannResult] = None, max_bits: int = 80):
    """An integer multiple h f that is lopsided, built by rounding q u.

    Needs an approximate inverse u with ||1 - f u||_1 < 1/2; q runs through
    powers of two above ||f||_1.
    """
    res = neumann if neumann is not None else neumann_inverse(f, N, K)
    if res.residual >= Fraction(1, 2):
        return None
    norm = f.l1_norm()
    j = max(1, int(norm).bit_length())
    while j <= max_bits:
        q = 1 << j
        h = RingElement({g: round(v * q) for g, v in res.u.raw_items()})
        if not h.is_zero():
            hf = ring_mul(h, f)
            lop = lopsided_check(hf)
            if lop is not None:
                return IdealCertificate(h, q, hf, lop)
        j += 1
    return None


# ---------------------------------------------------------------- the ladder


@dataclass
class Budget:
    lopsided: bool = True
    neumann: bool = True
    neumann_N: int = 8
    neumann_K: int = 24
    ideal: bool = True
    localization: bool = True
    grid: int = 512
    split_N: int = 12
    character: bool = True
    representation: bool = True
    p_max: int = 8
    rep_grid: int = 32
    cocycle: bool = True
    cocycle_grid: int = 512
    exhaustive: bool = True  # keep collecting evidence after a conclusive stage


@dataclass
class Evidence:
    stage: str
    kind: str  # "certificate", "witness" or "note"
    sound: bool
    detail: dict = field(default_factory=dict)
    seconds: float = 0.0

    def to_json(self) -> dict:
        return {"stage": self.stage, "kind": self.kind, "sound": self.sound, "detail": self.detail, "seconds": self.seconds}


@dataclass
class Verdict:
    status: str  # "expansive", "nonexpansive" or "inconclusive"
    polynomial: str
    evidence: list

    @property
    def certificates(self) -> list:
        return [e for e in self.evidence if e.kind == "certificate" and e.sound]

    @property
    def witnesses(self) -> list:
        return [e for e in self.evidence if e.kind == "witness" and e.sound]

    def to_json(self, timings: bool = False) -> dict:
        ev = []
        for e in self.evidence:
            d = e.to_json()
            if not timings:
                d.pop("seconds")
            ev.append(d)
        return {"polynomial": self.polynomial, "status": self.status, "evidence": ev}


def _status(evidence: list) -> str:
    cert = any(e.kind == "certificate" and e.sound for e in evidence)
    wit = any(e.kind == "witness" and e.sound for e in evidence)
    if cert and wit:
        return "contradiction"
    return "expansive" if cert else "nonexpansive" if wit else "inconclusive"


def decide(f: RingElement, budget: Optional[Budget] = None) -> Verdict:
    """Run the ladder; raises InvariantViolation on contradictory sound evidence."""
    from .cocycle import NotLinearError, condition1_scan, condition2_scan, decompose_linear
    from .localization import certify_all_theta
    from .witnesses import character_witness, rep_witnesses

    budget = budget or Budget()
    evidence: list = []
    text = format_poly(f)

    def done() -> bool:
        return not budget.exhaustive and _status(evidence) != "inconclusive"

    def add(stage, kind, sound, detail, t0):
        evidence.append(Evidence(stage, kind, sound, detail, time.perf_counter() - t0))

    if f.is_zero():
        add("input", "witness", True, {"reason": "f = 0"}, time.perf_counter())
        return Verdict("nonexpansive", text, evidence)

    if budget.lopsided:
        t0 = time.perf_counter()
        lop = lopsided_check(f)
        if lop is not None:
            add("lopsided", "certificate", True, {"site": list(lop.site), "margin": lop.margin}, t0)
        else:
            add("lopsided", "note", False, {"lopsided": False}, t0)

    neu = None
    if budget.neumann and not done():
        t0 = time.perf_counter()
        try:
            neu = neumann_inverse(f, budget.neumann_N, budget.neumann_K)
            add(
                "neumann",
                "certificate" if neu.certifies else "note",
                neu.certifies,
                {"N": neu.N, "K": neu.K, "seed": neu.seed, "residual": neu.residual},
                t0,
            )
        except NoSeriesSeed as exc:
            add("neumann", "note", False, {"error": str(exc)}, t0)

    if budget.ideal and neu is not None and not done():
        t0 = time.perf_counter()
        cert = lopsided_ideal_search(f, neumann=neu)
        if cert is not None:
            add(
                "lopsided_ideal",
                "certificate",
                True,
                {"q": cert.q, "support": len(cert.h.support()), "margin": cert.lopsided.margin},
                t0,
            )

    if budget.localization and not done():
        t0 = time.perf_counter()
        loc = certify_all_theta(f, budget.grid, budget.split_N)
        detail = {"verdict": loc.verdict, "gaps": len(loc.gaps)}
        if loc.verdict == "invertible-everywhere":
            add("localization", "certificate", True, detail, t0)
        elif loc.verdict == "noninvertible-at-theta=1":
            s1, s2 = loc.abelian_zero
            detail["zero"] = [s1, s2]
            add("localization", "witness", True, detail, t0)
        else:
            add("localization", "note", False, detail, t0)

    if budget.character and not done():
        t0 = time.perf_counter()
        w = character_witness(f)
        if w is not None:
            add("character", "witness", True, w.to_json(), t0)

    if budget.representation and not done():
        t0 = time.perf_counter()
        for w in rep_witnesses(f, budget.p_max, budget.rep_grid):
            add("representation", "witness", True, w.to_json(), t0)
            t0 = time.perf_counter()

    if budget.cocycle and not done():
        t0 = time.perf_counter()
        try:
            d = decompose_linear(f)
        except NotLinearError:
            d = None
        if d is not None:
            c2 = condition2_scan(d, budget.p_max, budget.cocycle_grid)
            for hit in c2.hits:
                add("cocycle_orbit", "witness" if hit.exact else "note", bool(hit.exact), hit.to_json(), t0)
                t0 = time.perf_counter()
            c1 = condition1_scan(d, budget.cocycle_grid)
            if c1.crossings:
                add(
                    "cocycle_mahler",
                    "note" if c1.advisory else "witness",
                    not c1.advisory,
                    {"crossings": c1.crossings, "advisory": c1.advisory},
                    t0,
                )

    status = _status(evidence)
    verdict = Verdict(status, text, evidence)
    if status == "contradiction":
        raise InvariantViolation(verdict)
    return verdict
