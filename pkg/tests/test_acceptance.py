"""The ten acceptance criteria, each timed against its budget.

Every criterion records one PASS/FAIL line, printed in the pytest terminal
summary (and directly when this file is run as a script).
"""

import math
import time
from contextlib import contextmanager
from fractions import Fraction

import numpy as np
import pytest

from heisendyn.cocycle import decompose_linear, entropy_bound
from heisendyn.core import Box, RingElement, parse_poly
from heisendyn.cover import BoxRegion, cover_experiment, random_configuration, tail_bound, topple_stabilize
from heisendyn.expansive import InvariantViolation, decide
from heisendyn.homoclinic import boundary_mass, build_kernel, central_inverse_norm, homoclinic_point, membership_defect
from heisendyn.localization import project
from heisendyn.qbinomial import _primes_upto, a_quotient, norm_series, poly_add, poly_mul, qbinom
from heisendyn.witnesses import rep_matrix

RESULTS = []
VERDICTS = {}


@contextmanager
def criterion(number, budget):
    start = time.perf_counter()
    info = {}
    try:
        yield info
    except BaseException as exc:
        took = time.perf_counter() - start
        RESULTS.append(f"CRITERION {number}: FAIL ({took:.1f} s) {type(exc).__name__}: {exc}")
        raise
    took = time.perf_counter() - start
    detail = info.get("detail", "")
    if took >= budget:
        RESULTS.append(f"CRITERION {number}: FAIL ({took:.1f} s, budget {budget} s) {detail}")
        pytest.fail(f"criterion {number} took {took:.1f} s, budget {budget} s")
    RESULTS.append(f"CRITERION {number}: PASS ({took:.1f} s) {detail}")


def _decide(text_or_f):
    f = parse_poly(text_or_f) if isinstance(text_or_f, str) else text_or_f
    v = decide(f)  # raises InvariantViolation on contradictory evidence
    VERDICTS[v.polynomial] = v
    return v


def _ex4(a, b, c):
    return RingElement({(0, 0, 0): abs(a) + abs(b) + abs(c), (1, 0, 0): a, (0, 1, 0): b, (0, 0, 1): c})


def test_criterion_01_central_inverse_norms():
    with criterion(1, 1) as info:
        for k in range(1, 11):
            res = central_inverse_norm(k, 32)
            closed = Fraction(1, 3**k) * (1 / (1 - Fraction(1, 3))) ** k
            assert closed == Fraction(1, 2**k)
            assert res.total == closed
        info["detail"] = "||(3+z)^-k||_1 = 2^-k exactly for k = 1..10"


def test_criterion_02_square_norms():
    with criterion(2, 1) as info:
        sq = parse_poly("x+y") ** 2
        assert sq.l1_norm() == 4
        assert project(sq, -1).norm() == 2
        info["detail"] = "||(x+y)^2||_1 = 4, twisted at theta = -1: 2"


def test_criterion_03_verdict_suite():
    with criterion(3, 60) as info:
        expected = {
            "3+x+y+z": "expansive",
            "3+x+y-z": "nonexpansive",
            "3+xy+yx+z": "expansive",
            "4+x+y+x^-1+z": "expansive",
            "3+x^2+y+z^2": "expansive",
            "3+x^2+y^2-z^4": "nonexpansive",
            "2+x+y+z": "nonexpansive",
        }
        got = {t: _decide(t) for t in expected}
        for t, status in expected.items():
            assert got[t].status == status, (t, got[t].status)

        f = parse_poly("3+x^2+y^2-z^4")
        reps = [e.detail for e in got["3+x^2+y^2-z^4"].witnesses if e.stage == "representation" and e.detail["p"] == 4]
        assert reps, "no 4-dimensional witness"
        w = reps[0]
        m = rep_matrix(f, 4, complex(*w["theta"]), complex(*w["zeta1"]), complex(*w["zeta2"]))
        det = abs(np.linalg.det(m))
        assert det < 1e-8

        hits = [e.detail for e in got["2+x+y+z"].witnesses if e.stage == "cocycle_orbit"]
        assert any(h["theta"] == "1/2" and h["exact_xi"] == "1/12" and h["exact"] for h in hits)
        info["detail"] = f"7/7 verdicts; 4-dim |det| = {det:.1e}; exact orbit hit theta = -1, xi = e^(2 pi i/12)"


def test_criterion_04_family_law():
    with criterion(4, 300) as info:
        count = 0
        for a in range(-3, 4):
            for b in range(-3, 4):
                for c in range(-3, 4):
                    if a * b == 0 or c == 0 or abs(a) + abs(b) <= 2:
                        continue
                    v = _decide(_ex4(a, b, c))
                    assert (v.status == "expansive") == (c > 0), (a, b, c, v.status)
                    count += 1
        info["detail"] = f"{count} triples, expansive iff c > 0"


def _pascal_ok(n, j):
    lhs = qbinom(n, j)
    rhs = poly_add(qbinom(n - 1, j), [0] * (n - j) + qbinom(n - 1, j - 1))
    return lhs == rhs


def _vandermonde_ok(k, j):
    rhs = [0]
    for i in range(0, k - j + 1):
        rhs = poly_add(rhs, [0] * (i * (i + j)) + poly_mul(qbinom(k, i), qbinom(k, i + j)))
    return qbinom(2 * k, k - j) == rhs


def test_criterion_05_qbinomial_suite():
    with criterion(5, 120) as info:
        for n in range(0, 41):
            for k in range(0, n + 1):
                p = qbinom(n, k)
                assert p == p[::-1]
                half = len(p) // 2
                assert all(p[i] <= p[i + 1] for i in range(half))
                assert sum(p) == math.comb(n, k)
                if 1 <= k <= n - 1:
                    assert _pascal_ok(n, k)
        for k in range(0, 21):
            for j in range(0, k + 1):
                assert _vandermonde_ok(k, j)
        triples = 0
        for n in range(2, 61):
            for k in range(1, n // 2 + 1):
                c = math.comb(n, k)
                for p in _primes_upto(n):
                    if p > k and c % p == 0:
                        assert sum(abs(t) for t in a_quotient(n, k, p)) * p == c
                        triples += 1
        info["detail"] = f"identities for n <= 40; ||A_(n,k,p)||_1 p = C(n,k) on {triples} triples"


def test_criterion_06_norm_series():
    with criterion(6, 600) as info:
        ns = norm_series(256)
        assert len(ns.T) == 257 and all(isinstance(t, Fraction) for t in ns.T)
        assert ns.decreasing_from(4)
        blocks = [float(ns.blocks[j]) for j in range(4, 8)]
        assert all(x > y for x, y in zip(blocks, blocks[1:]))
        info["detail"] = "block sums from (16,32]: " + ", ".join(f"{b:.3e}" for b in blocks)


def test_criterion_07_homoclinic_membership():
    with criterion(7, 300) as info:
        k = build_kernel(64)
        r = 16
        window = Box.centered(r, r, r * r)
        x = homoclinic_point(k, Box((-r - 1, r), (-r - 1, r), (-r * r - r, r * r + r)))
        defect, _ = membership_defect(x, parse_poly("2-x^-1-y^-1"), window)
        T = norm_series(65).T
        bound = boundary_mass(T, 64)
        assert bound == 2 * T[65]
        assert defect <= bound
        assert defect <= T[64] + T[65]
        info["detail"] = f"defect {float(defect):.3e} <= 2 T(65) = {float(bound):.3e}"


def test_criterion_08_entropy():
    with criterion(8, 30) as info:
        e = entropy_bound(decompose_linear(parse_poly("2-x-y")))
        assert abs(e.value - math.log(2)) < 1e-6
        assert abs(e.cross_check - math.log(2)) < 1e-6
        info["detail"] = f"Jensen route {e.value:.12f}, quadrature route {e.cross_check:.12f}"


def test_criterion_09_cover_experiment():
    with criterion(9, 600) as info:
        kernel = build_kernel(64)
        window = Box.centered(1, 1, 1)
        box = BoxRegion(6)
        outside = []
        rng = np.random.default_rng(2024)
        for _ in range(100):
            v = random_configuration(6, rng)
            res = topple_stabilize(v, 6)
            assert res.terminated
            assert all(res.configuration.values.get(g, 0) in (0, 1) for g in box)
            (pt,) = cover_experiment(v, [6], window, kernel)
            assert pt.d <= pt.b
            outside.append(res.outside_max)
        b2, b4, b8 = (tail_bound(M, window, kernel) for M in (2, 4, 8))
        assert b8 < b4 < b2
        hist = {m: outside.count(m) for m in sorted(set(outside))}
        info["detail"] = f"100/100 stabilized, d <= b; b(2,4,8) = {float(b2):.3f}, {float(b4):.3f}, {float(b8):.3f}; outside max histogram {hist}"


def test_criterion_10_consistency():
    with criterion(10, 600) as info:
        extra = ["2-x^-1-y^-1", "4+x+y+z", "7+3x+3y+z", "7+3x+3y-z", "5-x+3y+z"]
        for a in range(-3, 4):
            for b in range(-3, 4):
                for c in range(-3, 4):
                    if a * b != 0 and c != 0 and abs(a) + abs(b) <= 2:
                        extra.append(_ex4(a, b, c))
        for f in extra:
            try:
                _decide(f)
            except InvariantViolation as exc:
                raise AssertionError(f"contradictory evidence for {exc.verdict.polynomial}") from None
        both = [p for p, v in VERDICTS.items() if v.certificates and v.witnesses]
        assert not both
        info["detail"] = f"{len(VERDICTS)} inputs, none with both a certificate and a witness"


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q"]))
