import math
from fractions import Fraction

import numpy as np
import pytest

from heisendyn.core import Box, Configuration, group_inv, group_mul, parse_poly, torus_rep
from heisendyn.cover import (
    BoxRegion,
    OverlapError,
    TruncationWarning,
    coding_map,
    cover_experiment,
    random_configuration,
    shift_entropy_count,
    specification_patch,
    tail_bound,
    topple_stabilize,
)
from heisendyn.homoclinic import build_kernel, membership_defect


@pytest.fixture(scope="module")
def kernel():
    return build_kernel(24)


def test_box_size():
    for M in range(1, 5):
        assert len(BoxRegion(M)) == (2 * M + 1) ** 2 * (2 * M * M + 1)


def test_single_toppling():
    res = topple_stabilize(Configuration({(0, 0, 0): 2}), 1)
    assert res.topplings == 1
    assert res.configuration.values == {(1, 0, 0): 1, (0, 1, 0): 1}
    assert res.terminated


def test_zero_configuration():
    res = topple_stabilize(Configuration({}), 3)
    assert res.topplings == 0 and res.outside_max == 0


def test_toppling_moves_along_group_generators():
    # the chip sent from g = (0, 1, 0) along x lands on g x = (1, 1, -1)
    res = topple_stabilize(Configuration({(0, 1, 0): 2}), 2)
    assert res.configuration.values == {(1, 1, -1): 1, (0, 2, 0): 1}
    assert group_mul((0, 1, 0), (1, 0, 0)) == (1, 1, -1)


def test_cap_stops_without_error():
    v = Configuration({(0, 0, 0): 40})
    res = topple_stabilize(v, 3, cap=5)
    assert res.topplings == 5 and not res.terminated


@pytest.mark.parametrize("seed", range(5))
def test_stabilization_conserves_and_lands_in_01(seed):
    rng = np.random.default_rng(seed)
    v = random_configuration(3, rng)
    res = topple_stabilize(v, 3)
    assert res.terminated
    assert sum(v.values.values()) == sum(res.configuration.values.values())
    box = BoxRegion(3)
    assert all(res.configuration.values.get(g, 0) in (0, 1) for g in box)


def test_fifo_lifo_probe_recorded():
    # the abelian property is measured, not assumed
    same = 0
    for seed in range(10):
        v = random_configuration(2, np.random.default_rng(100 + seed))
        a = topple_stabilize(v, 2, order="fifo")
        b = topple_stabilize(v, 2, order="lifo")
        assert a.terminated and b.terminated
        same += a.configuration.values == b.configuration.values
    assert 0 <= same <= 10


def test_coding_map_of_point_mass_is_kernel(kernel):
    window = Box.centered(3, 3, 6)
    x = coding_map(Configuration({(0, 0, 0): 1}), kernel, window)
    for g in window:
        assert x[g] == torus_rep(kernel.coefficient(g))
    assert coding_map(Configuration({}), kernel, window).values == {}


def test_coding_map_lands_in_the_annihilator(kernel):
    rng = np.random.default_rng(7)
    sites = list(Box.centered(1, 1, 1))
    v = Configuration({g: int(rng.integers(-2, 3)) for g in sites})
    known = Box((-1, 4), (-1, 4), (-8, 8))
    x = coding_map(v, kernel, known)
    defect, _ = membership_defect(x, parse_poly("2-x^-1-y^-1"), Box((0, 3), (0, 3), (-5, 5)))
    assert defect == 0


def test_coding_map_is_equivariant(kernel):
    v = Configuration({(0, 0, 0): 1, (1, 0, 2): -2, (0, 1, -1): 1})
    gamma = (1, -1, 2)
    shifted = Configuration({group_mul(gamma, g): c for g, c in v.values.items()})
    window = Box.centered(2, 2, 3)
    lhs = coding_map(shifted, kernel, window)
    targets = [group_mul(group_inv(gamma), g) for g in window]
    rhs = coding_map(v, kernel, list(targets))
    for g, t in zip(window, targets):
        assert lhs.values.get(g, 0) == rhs.values.get(t, 0)


def test_truncation_warning():
    k = build_kernel(4)
    with pytest.warns(TruncationWarning):
        coding_map(Configuration({(0, 0, 0): 1}), k, Box((5, 5), (0, 0), (-2, 0)))


def test_tail_bound_decreases(kernel):
    window = Box.centered(1, 1, 1)
    bs = [tail_bound(M, window, build_kernel(64)) for M in (2, 4, 6)]
    assert bs[0] > bs[1] > bs[2] > 0


def test_cover_experiment_on_01_data(kernel):
    rng = np.random.default_rng(3)
    v = random_configuration(4, rng, values=(0, 1))
    pts = cover_experiment(v, [2, 4], kernel=build_kernel(64))
    assert all(p.d == 0 and p.topplings == 0 for p in pts)


def test_cover_experiment_identity_spike():
    # one toppling; d is the mass of the single stencil difference seen by the window
    v = Configuration({(0, 0, 0): 2})
    pts = cover_experiment(v, [1], kernel=build_kernel(64))
    assert pts[0].topplings == 1 and pts[0].d <= pts[0].b


def test_specification_patch():
    k = build_kernel(64)
    x1 = Configuration(dict(k.element(max_level=6).raw_items()), None, torus=True)
    zero = Configuration({})
    F1, F2 = Box.centered(0, 0, 1), Box((40, 40), (0, 0), (0, 0))
    res = specification_patch(x1, zero, F1, F2, Fraction(1, 10), kernel=k)
    assert res.configuration is not None and res.deviation < Fraction(1, 10)
    res = specification_patch(zero, zero, F1, F2, Fraction(1, 10), kernel=k)
    assert res.configuration.values == {}
    with pytest.raises(OverlapError):
        specification_patch(x1, zero, F1, Box((3, 3), (0, 0), (0, 0)), Fraction(1, 10), kernel=k)


def test_shift_entropy():
    assert shift_entropy_count(1) == math.log(2)
    assert shift_entropy_count(2) == math.log(2)
    with pytest.raises(ValueError):
        shift_entropy_count(5)
