"""Discrete Heisenberg group, its integral group ring and configurations.

Group elements are stored in the normal form x^a y^b z^c as integer
triples (a, b, c).  With the relation x^k y^l = y^l x^k z^(kl) the product
is

    (a, b, c) * (a', b', c') = (a + a', b + b', c + c' - a' b)

so that y x = x y z^-1 and z is central.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from numbers import Number
from typing import Callable, Iterable, Iterator, Mapping, NamedTuple, Optional


class GroupElement(NamedTuple):
    a: int
    b: int
    c: int

    def __mul__(self, other):
        return GroupElement(*group_mul(self, other))

    def inverse(self) -> "GroupElement":
        return GroupElement(*group_inv(self))


IDENTITY = GroupElement(0, 0, 0)
X = GroupElement(1, 0, 0)
Y = GroupElement(0, 1, 0)
Z = GroupElement(0, 0, 1)


def group_mul(g, h):
    return (g[0] + h[0], g[1] + h[1], g[2] + h[2] - h[0] * g[1])


def group_inv(g):
    return (-g[0], -g[1], -g[2] - g[0] * g[1])


def commutator(g, h):
    """g h g^-1 h^-1, always a power of z."""
    return group_mul(group_mul(g, h), group_mul(group_inv(g), group_inv(h)))


# ---------------------------------------------------------------- coefficients

_RING_ORDER = {"int": 0, "rational": 1, "complex": 2}


class CoefficientRingError(TypeError):
    """A coefficient does not belong to the requested coefficient ring."""


def coefficient_ring(value) -> str:
    if isinstance(value, bool):
        raise CoefficientRingError(f"boolean is not a coefficient: {value!r}")
    if isinstance(value, int):
        return "int"
    if isinstance(value, Fraction):
        return "int" if value.denominator == 1 else "rational"
    if isinstance(value, (float, complex)):
        return "complex"
    if isinstance(value, Number):
        return "complex"
    raise CoefficientRingError(f"unsupported coefficient {value!r}")


def _coerce(value, ring: str):
    have = coefficient_ring(value)
    if _RING_ORDER[have] > _RING_ORDER[ring]:
        raise CoefficientRingError(f"coefficient {value!r} is not in ring {ring!r}")
    if ring == "int":
        return int(value)
    if ring == "rational":
        return Fraction(value)
    return complex(value)


def _join(r1: str, r2: str) -> str:
    return r1 if _RING_ORDER[r1] >= _RING_ORDER[r2] else r2


# ---------------------------------------------------------------- ring elements


class RingElement:
    """Finitely supported element of the group ring over Z, Q or C.

    Coefficients are exact (int or Fraction) unless the ring is "complex".
    Products are convolutions with respect to the Heisenberg group law.
    """

    __slots__ = ("_terms", "ring")

    def __init__(self, terms: Optional[Mapping] = None, ring: Optional[str] = None):
        terms = dict(terms or {})
        if ring is None:
            ring = "int"
            for v in terms.values():
                ring = _join(ring, coefficient_ring(v))
        elif ring not in _RING_ORDER:
            raise CoefficientRingError(f"unknown ring {ring!r}")
        clean = {}
        for g, v in terms.items():
            if v != 0:
                clean[(int(g[0]), int(g[1]), int(g[2]))] = _coerce(v, ring)
        self._terms = clean
        self.ring = ring

    @classmethod
    def _raw(cls, terms: dict, ring: str) -> "RingElement":
        # trusted constructor: keys are tuples, values already coerced and nonzero
        obj = cls.__new__(cls)
        obj._terms = terms
        obj.ring = ring
        return obj

    @classmethod
    def monomial(cls, g, coefficient=1) -> "RingElement":
        return cls({tuple(g): coefficient})

    @classmethod
    def constant(cls, value) -> "RingElement":
        return cls({(0, 0, 0): value})

    # mapping-like access
    def __getitem__(self, g):
        return self._terms.get(tuple(g), 0)

    def __len__(self):
        return len(self._terms)

    def __iter__(self) -> Iterator[tuple]:
        return iter(sorted(self._terms))

    def items(self):
        return sorted(self._terms.items())

    def raw_items(self):
        return self._terms.items()

    @property
    def terms(self) -> dict:
        return dict(self.items())

    def support(self) -> list:
        return sorted(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def constant_term(self):
        return self._terms.get((0, 0, 0), 0)

    def central_part(self) -> "RingElement":
        return RingElement._raw({g: v for g, v in self._terms.items() if g[0] == 0 and g[1] == 0}, self.ring)

    def noncentral_part(self) -> "RingElement":
        return RingElement._raw({g: v for g, v in self._terms.items() if g[0] != 0 or g[1] != 0}, self.ring)

    def l1_norm(self):
        return l1_norm(self)

    def star(self) -> "RingElement":
        return involution(self)

    def map_coefficients(self, fn: Callable, ring: Optional[str] = None) -> "RingElement":
        return RingElement({g: fn(v) for g, v in self._terms.items()}, ring)

    def to_ring(self, ring: str) -> "RingElement":
        return RingElement(self._terms, _join(ring, self.ring))

    # arithmetic
    def _binop(self, other, sign):
        other = as_ring_element(other)
        ring = _join(self.ring, other.ring)
        out = dict(self._terms)
        for g, v in other._terms.items():
            s = out.get(g, 0) + sign * v
            if s == 0:
                out.pop(g, None)
            else:
                out[g] = s
        return RingElement(out, ring)

    def __add__(self, other):
        return self._binop(other, 1)

    __radd__ = __add__

    def __sub__(self, other):
        return self._binop(other, -1)

    def __rsub__(self, other):
        return as_ring_element(other)._binop(self, -1)

    def __neg__(self):
        return RingElement._raw({g: -v for g, v in self._terms.items()}, self.ring)

    def __mul__(self, other):
        if isinstance(other, RingElement):
            return ring_mul(self, other)
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def scale(self, s) -> "RingElement":
        ring = _join(self.ring, coefficient_ring(s))
        if s == 0:
            return RingElement._raw({}, ring)
        return RingElement({g: v * s for g, v in self._terms.items()}, ring)

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative powers are not defined in the group ring")
        result = RingElement.constant(1)
        base = self
        while n:
            if n & 1:
                result = ring_mul(result, base)
            n >>= 1
            if n:
                base = ring_mul(base, base)
        return result

    def __eq__(self, other):
        if isinstance(other, RingElement):
            return self._terms == other._terms
        if isinstance(other, Number):
            return self._terms == RingElement.constant(other)._terms
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self._terms.items()))

    def __repr__(self):
        return f"RingElement({format_poly(self)!r})"

    def __str__(self):
        return format_poly(self)


def as_ring_element(value) -> RingElement:
    if isinstance(value, RingElement):
        return value
    if isinstance(value, str):
        return parse_poly(value)
    return RingElement.constant(value)


def ring_mul(f: RingElement, g: RingElement) -> RingElement:
    ring = _join(f.ring, g.ring)
    out: dict = {}
    get = out.get
    gitems = list(g._terms.items())
    for (a, b, c), u in f._terms.items():
        for (a2, b2, c2), v in gitems:
            key = (a + a2, b + b2, c + c2 - a2 * b)
            out[key] = get(key, 0) + u * v
    return RingElement._raw({k: v for k, v in out.items() if v != 0}, ring)


def involution(f: RingElement) -> RingElement:
    """f*_g = conj(f_{g^-1})."""
    conj = f.ring == "complex"
    out = {}
    for g, v in f._terms.items():
        out[group_inv(g)] = v.conjugate() if conj else v
    return RingElement._raw(out, f.ring)


def l1_norm(f: RingElement):
    """Exact for int/rational coefficients, float for complex ones."""
    return sum((abs(v) for v in f._terms.values()), 0)


def right_translate(f: RingElement, g) -> RingElement:
    """f * g for a group element g."""
    return RingElement._raw({group_mul(h, g): v for h, v in f._terms.items()}, f.ring)


def left_translate(g, f: RingElement) -> RingElement:
    return RingElement._raw({group_mul(g, h): v for h, v in f._terms.items()}, f.ring)


def swap_xy(f: RingElement) -> RingElement:
    """The automorphism x -> y, y -> x, z -> z^-1.

    On normal forms it maps (a, b, c) to (b, a, -c - ab); it is an involution.
    """
    return RingElement._raw({(b, a, -c - a * b): v for (a, b, c), v in f._terms.items()}, f.ring)


# ---------------------------------------------------------------- parsing


class ParseError(ValueError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at byte {offset}")
        self.message = message
        self.offset = offset


_TOKEN = re.compile(r"\s*(?:(\d+)|([xyz])|(\^)|(\*)|(\+)|(-)|(/))")


def _tokenize(text: str) -> list:
    tokens = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", len(text[:pos].encode()))
        start = m.start(m.lastindex)
        kind = ("int", "var", "^", "*", "+", "-", "/")[m.lastindex - 1]
        tokens.append((kind, m.group(m.lastindex), len(text[:start].encode())))
        pos = m.end()
    tokens.append(("end", "", len(text.encode())))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self, kind=None):
        tok = self.tokens[self.i]
        if kind is not None and tok[0] != kind:
            want = "integer" if kind == "int" else repr(kind)
            got = "end of input" if tok[0] == "end" else repr(tok[1])
            raise ParseError(f"expected {want}, found {got}", tok[2])
        self.i += 1
        return tok

    def expr(self) -> RingElement:
        terms: dict = {}
        sign = 1
        if self.peek()[0] in "+-":
            sign = -1 if self.take()[0] == "-" else 1
        while True:
            g, coef = self.term()
            terms[g] = terms.get(g, 0) + sign * coef
            kind = self.peek()[0]
            if kind in ("+", "-"):
                sign = 1 if self.take()[0] == "+" else -1
                continue
            if kind != "end":
                tok = self.peek()
                raise ParseError(f"unexpected {tok[1]!r}", tok[2])
            return RingElement(terms)

    def coefficient(self):
        num = int(self.take("int")[1])
        if self.peek()[0] == "/":
            tok = self.take()
            den = int(self.take("int")[1])
            if den == 0:
                raise ParseError("zero denominator", tok[2])
            return Fraction(num, den)
        return num

    def term(self):
        coef = 1
        g = (0, 0, 0)
        kind = self.peek()[0]
        if kind == "int":
            coef = self.coefficient()
            if self.peek()[0] == "*":
                self.take()
                g = group_mul(g, self.factor())
            elif self.peek()[0] == "var":
                g = group_mul(g, self.factor())
            else:
                return g, coef
        else:
            g = group_mul(g, self.factor())
        while self.peek()[0] in ("*", "var"):
            if self.peek()[0] == "*":
                self.take()
            g = group_mul(g, self.factor())
        return g, coef

    def factor(self):
        tok = self.take("var")
        exp = 1
        if self.peek()[0] == "^":
            self.take()
            neg = False
            if self.peek()[0] == "-":
                self.take()
                neg = True
            exp = int(self.take("int")[1])
            if neg:
                exp = -exp
        if tok[1] == "x":
            return (exp, 0, 0)
        if tok[1] == "y":
            return (0, exp, 0)
        return (0, 0, exp)


def parse_poly(text: str) -> RingElement:
    """Parse a noncommutative Laurent polynomial in x, y, z.

    Words are reduced to normal form through the group law, so "x*y - y*x*z"
    parses to zero.  Coefficients are integers, optionally written p/q, and
    adjacent factors may omit the "*" ("3+xy+yx+z").
    """
    return _Parser(text).expr()


def _format_coef(v) -> str:
    if isinstance(v, complex):
        return f"({v.real!r}{v.imag:+}j)"
    return str(v)


def format_poly(f: RingElement) -> str:
    """Canonical text: terms sorted by (a, b, c), coefficient first."""
    items = f.items()
    if not items:
        return "0"
    parts = []
    for i, ((a, b, c), v) in enumerate(items):
        mono = "*".join(
            s if e == 1 else f"{s}^{e}" for s, e in (("x", a), ("y", b), ("z", c)) if e != 0
        )
        neg = not isinstance(v, complex) and v < 0
        mag = -v if neg else v
        if not mono:
            body = _format_coef(mag)
        elif mag == 1:
            body = mono
        else:
            body = f"{_format_coef(mag)}*{mono}"
        if i == 0:
            parts.append(("-" if neg else "") + body)
        else:
            parts.append((" - " if neg else " + ") + body)
    return "".join(parts)


# ---------------------------------------------------------------- regions and configurations


class Region:
    def __contains__(self, g) -> bool:  # pragma: no cover - interface
        raise NotImplementedError


class Box(Region):
    """Sites with coordinates inside closed integer intervals."""

    def __init__(self, a_range, b_range, c_range):
        self.a_range = tuple(a_range)
        self.b_range = tuple(b_range)
        self.c_range = tuple(c_range)

    @classmethod
    def centered(cls, ra: int, rb: int, rc: int) -> "Box":
        return cls((-ra, ra), (-rb, rb), (-rc, rc))

    @classmethod
    def heisenberg_ball(cls, m: int) -> "Box":
        """|a| <= m, |b| <= m, |c| <= m^2."""
        return cls.centered(m, m, m * m)

    def __contains__(self, g) -> bool:
        return (
            self.a_range[0] <= g[0] <= self.a_range[1]
            and self.b_range[0] <= g[1] <= self.b_range[1]
            and self.c_range[0] <= g[2] <= self.c_range[1]
        )

    def __len__(self):
        return math.prod(r[1] - r[0] + 1 for r in (self.a_range, self.b_range, self.c_range))

    def __iter__(self):
        for a in range(self.a_range[0], self.a_range[1] + 1):
            for b in range(self.b_range[0], self.b_range[1] + 1):
                for c in range(self.c_range[0], self.c_range[1] + 1):
                    yield (a, b, c)

    def __repr__(self):
        return f"Box({self.a_range}, {self.b_range}, {self.c_range})"


class SiteSet(Region):
    def __init__(self, sites: Iterable):
        self.sites = frozenset(tuple(s) for s in sites)

    def __contains__(self, g) -> bool:
        return tuple(g) in self.sites

    def __iter__(self):
        return iter(sorted(self.sites))

    def __len__(self):
        return len(self.sites)


class Interior(Region):
    """Sites g of a base region such that g*s lies in the base for every s in a stencil."""

    def __init__(self, base: Region, stencil: Iterable):
        self.base = base
        self.stencil = [tuple(s) for s in stencil]

    def __contains__(self, g) -> bool:
        return g in self.base and all(group_mul(g, s) in self.base for s in self.stencil)


class BoundaryUnknown(KeyError):
    """The value at a site depends on data outside the known region."""


class Configuration:
    """A function on the group, given by finitely many stored values.

    With region None the configuration is zero off its stored values.  With a
    region, values are known only inside it (zero where not stored) and
    lookups outside raise BoundaryUnknown.  Torus-valued configurations keep
    exact representatives in [-1/2, 1/2).
    """

    def __init__(self, values: Mapping, region: Optional[Region] = None, torus: bool = False):
        self.values = {tuple(g): v for g, v in values.items() if v != 0}
        self.region = region
        self.torus = torus
        if torus:
            self.values = {g: v for g, v in ((g, torus_rep(v)) for g, v in self.values.items()) if v != 0}

    def is_known(self, g) -> bool:
        return self.region is None or tuple(g) in self.region

    def __getitem__(self, g):
        g = tuple(g)
        if self.region is not None and g not in self.region:
            raise BoundaryUnknown(g)
        return self.values.get(g, 0)

    def get(self, g, default=None):
        try:
            return self[g]
        except BoundaryUnknown:
            return default

    def items(self):
        return sorted(self.values.items())

    def __len__(self):
        return len(self.values)


def torus_rep(t):
    """Representative of t mod 1 in [-1/2, 1/2)."""
    if isinstance(t, int):
        return 0
    return t - math.floor(t + Fraction(1, 2))


def torus_norm(t):
    """Distance from t to the nearest integer."""
    return abs(torus_rep(t))


def act_rho(f: RingElement, v: Configuration) -> Configuration:
    """(rho^f v)_g = sum_s f_s v_{g s}.

    For a region-bounded v the result lives on the interior of that region;
    sites whose stencil leaves the region are boundary-unknown.
    """
    fitems = list(f.raw_items())
    out: dict = {}
    for h, val in v.values.items():
        for s, coef in fitems:
            g = group_mul(h, group_inv(s))
            out[g] = out.get(g, 0) + coef * val
    if v.region is None:
        return Configuration(out, None, v.torus)
    interior = Interior(v.region, [s for s, _ in fitems])
    return Configuration({g: val for g, val in out.items() if g in interior}, interior, v.torus)
