from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import ring_elements, sites
from heisendyn.core import (
    IDENTITY,
    X,
    Y,
    Z,
    BoundaryUnknown,
    Box,
    Configuration,
    GroupElement,
    ParseError,
    RingElement,
    act_rho,
    commutator,
    format_poly,
    group_inv,
    group_mul,
    parse_poly,
    swap_xy,
    torus_norm,
    torus_rep,
)


def test_group_relations():
    assert group_mul(Y, X) == group_mul(group_mul(X, Y), group_inv(Z))
    assert commutator(X, Y) == Z
    assert group_mul(Z, X) == group_mul(X, Z)
    assert GroupElement(1, 2, 3) * GroupElement(1, 2, 3).inverse() == IDENTITY


@given(sites, sites, sites)
def test_group_associative(g, h, k):
    assert group_mul(group_mul(g, h), k) == group_mul(g, group_mul(h, k))


@given(sites)
def test_group_inverse(g):
    assert group_mul(g, group_inv(g)) == (0, 0, 0)
    assert group_mul(group_inv(g), g) == (0, 0, 0)


@given(ring_elements(), ring_elements(), ring_elements())
def test_ring_associative_and_distributive(f, g, h):
    assert (f * g) * h == f * (g * h)
    assert f * (g + h) == f * g + f * h


@given(ring_elements(), ring_elements())
def test_involution_reverses_products(f, g):
    assert (f * g).star() == g.star() * f.star()
    assert f.star().star() == f


@given(ring_elements(), ring_elements())
def test_norm_submultiplicative(f, g):
    assert (f * g).l1_norm() <= f.l1_norm() * g.l1_norm()


@given(ring_elements())
def test_swap_is_an_involutive_automorphism(f):
    assert swap_xy(swap_xy(f)) == f
    g = parse_poly("x - 2*y*z")
    assert swap_xy(f * g) == swap_xy(f) * swap_xy(g)


@given(ring_elements())
def test_format_parse_roundtrip(f):
    assert parse_poly(format_poly(f)) == f


def test_parse_examples():
    assert parse_poly("x*y - y*x*z") == RingElement({})
    assert parse_poly("3+xy+yx+z") == parse_poly("3 + x*y + y*x + z")
    assert parse_poly("2-x^-1-y^-1") == RingElement({(0, 0, 0): 2, (-1, 0, 0): -1, (0, -1, 0): -1})
    assert parse_poly("-x") == RingElement({(1, 0, 0): -1})
    assert parse_poly("1/2 z^2") == RingElement({(0, 0, 2): Fraction(1, 2)})
    assert (parse_poly("x+y") ** 2).l1_norm() == 4
    assert parse_poly("y*x") == RingElement({(1, 1, -1): 1})


@pytest.mark.parametrize("text,offset", [("3+x+*y", 4), ("x^", 2), ("2+w", 2), ("x*", 2)])
def test_parse_errors_carry_offsets(text, offset):
    with pytest.raises(ParseError) as exc:
        parse_poly(text)
    assert exc.value.offset == offset


def test_format_is_canonical():
    assert format_poly(parse_poly("z + 3 + x")) == "3 + z + x"
    assert format_poly(parse_poly("-2*x^-1*z")) == "-2*x^-1*z"
    assert format_poly(RingElement({})) == "0"


def test_torus_representatives():
    assert torus_rep(Fraction(1, 2)) == Fraction(-1, 2)
    assert torus_rep(Fraction(7, 4)) == Fraction(-1, 4)
    assert torus_norm(Fraction(-3, 4)) == Fraction(1, 4)
    assert torus_rep(5) == 0


def test_box_and_configuration():
    box = Box.heisenberg_ball(2)
    assert len(box) == 5 * 5 * 9
    assert (2, -2, 4) in box and (0, 0, 5) not in box
    c = Configuration({(0, 0, 0): 1}, box)
    assert c[(1, 1, 1)] == 0
    with pytest.raises(BoundaryUnknown):
        c[(3, 0, 0)]
    assert c.get((3, 0, 0)) is None


@given(ring_elements(max_terms=3), ring_elements(max_terms=3), st.dictionaries(sites, st.integers(-2, 2), max_size=4))
def test_rho_is_a_right_module_action(f, g, vals):
    # rho^f v = v f*, so rho^(f g) = rho^f rho^g
    v = Configuration(vals)
    lhs = act_rho(f * g, v)
    rhs = act_rho(f, act_rho(g, v))
    assert lhs.values == rhs.values


def test_rho_marks_boundary():
    f = parse_poly("2-x^-1-y^-1")
    box = Box.centered(2, 2, 4)
    v = Configuration({g: 1 for g in box}, box)
    out = act_rho(f, v)
    assert out.get((0, 0, 0)) == 0
    assert out.get((-2, 0, 0)) is None
