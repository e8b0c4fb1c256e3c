"""Small polynomial containers shared by the numerical modules."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from mpmath import mp


@dataclass(frozen=True)
class Poly:
    """Dense polynomial, coefficients in ascending order.

    Works with any ring-like scalars (``int``, ``Fraction``, ``mpf``, ``mpc``).
    """

    coeffs: tuple

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(self.coeffs))

    @property
    def degree(self) -> int:
        c = self.coeffs
        for i in range(len(c) - 1, -1, -1):
            if c[i] != 0:
                return i
        return -1

    def __call__(self, z):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * z + c
        return acc

    def __getitem__(self, i: int):
        return self.coeffs[i] if 0 <= i < len(self.coeffs) else 0

    def __add__(self, other: "Poly") -> "Poly":
        n = max(len(self.coeffs), len(other.coeffs))
        return Poly(tuple(self[i] + other[i] for i in range(n)))

    def __sub__(self, other: "Poly") -> "Poly":
        n = max(len(self.coeffs), len(other.coeffs))
        return Poly(tuple(self[i] - other[i] for i in range(n)))

    def scale(self, c) -> "Poly":
        return Poly(tuple(c * x for x in self.coeffs))

    def shift(self, m: int = 1) -> "Poly":
        """Multiply by ``z**m``."""
        return Poly((0,) * m + self.coeffs)

    def derivative(self) -> "Poly":
        return Poly(tuple(i * self.coeffs[i] for i in range(1, len(self.coeffs))) or (0,))

    def max_abs(self):
        return max((abs(c) for c in self.coeffs), default=0)


class MonicPoly(Poly):
    """Polynomial whose leading coefficient is exactly one."""

    def __post_init__(self):
        super().__post_init__()
        c = self.coeffs
        if not c or c[-1] != 1:
            raise ValueError("leading coefficient of a MonicPoly must be exactly 1")

    @classmethod
    def from_roots(cls, roots: Sequence) -> "MonicPoly":
        c = [1]
        for r in roots:
            nxt = [0] * (len(c) + 1)
            for i, v in enumerate(c):
                nxt[i + 1] += v
                nxt[i] -= r * v
            c = nxt
        c[-1] = 1
        return cls(tuple(c))


def as_monic(p: Poly) -> MonicPoly:
    d = p.degree
    lead = p.coeffs[d]
    c = [x / lead for x in p.coeffs[: d + 1]]
    c[-1] = 1
    return MonicPoly(tuple(c))


@dataclass(frozen=True)
class ChebSeries:
    """Chebyshev series ``sum c_m T_m(x)`` on ``[a, b]`` with ``x`` the affine map to ``[-1, 1]``."""

    coeffs: tuple
    a: object
    b: object

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def to_x(self, t):
        return (2 * t - self.a - self.b) / (self.b - self.a)

    def __call__(self, t):
        x = self.to_x(t)
        b1 = b2 = 0
        for c in reversed(self.coeffs[1:]):
            b1, b2 = 2 * x * b1 - b2 + c, b1
        return x * b1 - b2 + self.coeffs[0]

    def with_derivative(self, t):
        """Value and ``d/dt`` by forward recurrence on ``T_m`` and ``T_m'``."""
        x = self.to_x(t)
        c = self.coeffs
        t0, t1 = 1, x
        d0, d1 = 0, 1
        val = c[0] + (c[1] * x if len(c) > 1 else 0)
        der = c[1] if len(c) > 1 else 0
        for m in range(2, len(c)):
            t0, t1 = t1, 2 * x * t1 - t0
            d0, d1 = d1, 2 * t0 + 2 * x * d1 - d0
            val += c[m] * t1
            der += c[m] * d1
        return val, der * 2 / (self.b - self.a)

    def lead(self):
        """Coefficient of ``t**degree``."""
        d = self.degree
        if d == 0:
            return self.coeffs[0]
        return self.coeffs[-1] * mp.power(2, d - 1) * (2 / (self.b - self.a)) ** d

    def to_monomial(self) -> Poly:
        """Monomial coefficients in ``t``."""
        al = 2 / (self.b - self.a)
        be = -(self.a + self.b) / (self.b - self.a)
        tm1, t = [mp.one], [be, al]
        out = [self.coeffs[0] * v for v in tm1]
        for m in range(1, len(self.coeffs)):
            if m > 1:
                nxt = [mp.zero] * (m + 1)
                for i, v in enumerate(t):
                    nxt[i] += 2 * be * v
                    nxt[i + 1] += 2 * al * v
                for i, v in enumerate(tm1):
                    nxt[i] -= v
                tm1, t = t, nxt
            out = out + [mp.zero] * (len(t) - len(out))
            for i, v in enumerate(t):
                out[i] += self.coeffs[m] * v
        return Poly(tuple(out))

    def times_t(self) -> "ChebSeries":
        """Series of ``t * f(t)``."""
        h = (self.b - self.a) / 2
        cen = (self.a + self.b) / 2
        c = list(self.coeffs)
        out = [mp.zero] * (len(c) + 1)
        for k, v in enumerate(c):
            out[k] += cen * v
            if k == 0:
                out[1] += h * v
            else:
                out[k + 1] += h * v / 2
                out[k - 1] += h * v / 2
        return ChebSeries(tuple(out), self.a, self.b)

    def combine(self, other: "ChebSeries", c) -> "ChebSeries":
        """``self - c * other``."""
        n = max(len(self.coeffs), len(other.coeffs))
        s = list(self.coeffs) + [mp.zero] * (n - len(self.coeffs))
        for k, v in enumerate(other.coeffs):
            s[k] -= c * v
        return ChebSeries(tuple(s), self.a, self.b)


def cheb_table(xs: Sequence, degree: int) -> list[list]:
    """``T_m(x)`` for ``m <= degree`` at every ``x``; returns rows indexed by ``m``."""
    rows = [[mp.one] * len(xs)]
    if degree >= 1:
        rows.append(list(xs))
    for m in range(2, degree + 1):
        rows.append([2 * x * u - v for x, u, v in zip(xs, rows[-1], rows[-2])])
    return rows


def float_cheb_roots(coeffs: Sequence) -> np.ndarray:
    """Double-precision colleague-matrix roots of a Chebyshev series."""
    lead = coeffs[-1]
    c = np.array([float(v / lead) for v in coeffs])
    return np.polynomial.chebyshev.chebroots(c)
