"""Laurent polynomials in one and two commuting variables."""

from __future__ import annotations

from typing import Mapping

import numpy as np


class LaurentPolynomial:
    """sum_e c_e t^e with integer exponents; coefficients exact or complex."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Mapping[int, object] = None):
        self.coeffs = {int(e): c for e, c in (coeffs or {}).items() if c != 0}

    @classmethod
    def from_list(cls, coeffs, low: int = 0) -> "LaurentPolynomial":
        return cls({low + i: c for i, c in enumerate(coeffs)})

    @property
    def low(self) -> int:
        return min(self.coeffs, default=0)

    @property
    def high(self) -> int:
        return max(self.coeffs, default=0)

    def dense(self) -> list:
        """Coefficients from t^low to t^high."""
        if not self.coeffs:
            return [0]
        return [self.coeffs.get(e, 0) for e in range(self.low, self.high + 1)]

    def __add__(self, other):
        out = dict(self.coeffs)
        for e, c in other.coeffs.items():
            out[e] = out.get(e, 0) + c
        return LaurentPolynomial(out)

    def __sub__(self, other):
        out = dict(self.coeffs)
        for e, c in other.coeffs.items():
            out[e] = out.get(e, 0) - c
        return LaurentPolynomial(out)

    def __mul__(self, other):
        if not isinstance(other, LaurentPolynomial):
            return LaurentPolynomial({e: c * other for e, c in self.coeffs.items()})
        out: dict = {}
        for e, c in self.coeffs.items():
            for e2, c2 in other.coeffs.items():
                out[e + e2] = out.get(e + e2, 0) + c * c2
        return LaurentPolynomial(out)

    __rmul__ = __mul__

    def __eq__(self, other):
        return isinstance(other, LaurentPolynomial) and self.coeffs == other.coeffs

    def __call__(self, t):
        t = np.asarray(t, dtype=complex)
        return sum(c * t**e for e, c in self.coeffs.items()) if self.coeffs else np.zeros_like(t)

    def l1(self):
        return sum(abs(c) for c in self.coeffs.values())

    def is_zero(self) -> bool:
        return not self.coeffs

    def __repr__(self):
        return f"LaurentPolynomial({dict(sorted(self.coeffs.items()))})"


class BivariateLaurent:
    """sum c_(i,j) xi^i theta^j."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Mapping[tuple, object] = None):
        self.coeffs = {(int(i), int(j)): c for (i, j), c in (coeffs or {}).items() if c != 0}

    def __call__(self, xi, theta):
        xi = np.asarray(xi, dtype=complex)
        theta = np.asarray(theta, dtype=complex)
        out = np.zeros(np.broadcast(xi, theta).shape, dtype=complex)
        for (i, j), c in self.coeffs.items():
            out = out + c * xi**i * theta**j
        return out

    def at_theta(self, theta: complex) -> LaurentPolynomial:
        """The one-variable polynomial xi -> g(xi, theta)."""
        out: dict = {}
        for (i, j), c in self.coeffs.items():
            out[i] = out.get(i, 0) + c * complex(theta) ** j
        return LaurentPolynomial(out)

    def lipschitz(self) -> float:
        """Bound for |g(p) - g(p')| / max angle difference on the torus."""
        return float(sum(abs(c) * (abs(i) + abs(j)) for (i, j), c in self.coeffs.items()))

    def is_zero(self) -> bool:
        return not self.coeffs

    def __eq__(self, other):
        return isinstance(other, BivariateLaurent) and self.coeffs == other.coeffs

    def __repr__(self):
        return f"BivariateLaurent({dict(sorted(self.coeffs.items()))})"
