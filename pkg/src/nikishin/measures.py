"""Star geometry, generating measures and the nested measure hierarchy.

A system is described in the segment coordinate ``tau = z^(p+1)``.  The
``k``-th generating measure lives on ``[a_k, b_k]`` with ``a_k >= 0`` for even
``k`` and ``b_k <= 0`` for odd ``k``.  Each segment measure is replaced by a
Gauss rule with positive weights; all later objects (the hierarchy
``mu_{k,j}``, second-kind functions, ...) are built from those nodes, so the
discrete system is itself an exact Nikishin system and the algebraic
identities hold to round-off.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

from mpmath import mp

from . import quadrature as qd

DEFAULT_PREC = 256
POLE_GUARD = mp.mpf("1e-8")


class InvalidSystem(ValueError):
    """Raised when a star system violates a structural constraint."""


class PoleProximityError(ArithmeticError):
    """Evaluation point too close to a quadrature node."""



@dataclass(frozen=True)
class DensitySpec:
    """Density of a generating measure in the segment coordinate.

    kind ``"power"``: ``|tau|^gamma``.
    kind ``"jacobi"``: ``(tau-a)^alpha (b-tau)^beta``.
    kind ``"tabulated"``: piecewise-linear interpolant of ``values`` on
    ``abscissae`` (which must start at ``a`` and end at ``b``).
    """

    kind: str
    gamma: object = 0
    alpha: object = 0
    beta: object = 0
    abscissae: tuple = ()
    values: tuple = ()

    def validate(self, interval) -> None:
        a, b = interval
        if self.kind == "power":
            if mp.mpf(self.gamma) <= -1:
                raise InvalidSystem(f"power exponent {self.gamma} must exceed -1")
            if mp.mpf(self.gamma) < 0 and a < 0 < b:
                raise InvalidSystem("negative power exponent with 0 inside the interval")
        elif self.kind == "jacobi":
            if mp.mpf(self.alpha) <= -1 or mp.mpf(self.beta) <= -1:
                raise InvalidSystem(f"jacobi exponents ({self.alpha}, {self.beta}) must exceed -1")
        elif self.kind == "tabulated":
            xs = [mp.mpf(x) for x in self.abscissae]
            ys = [mp.mpf(y) for y in self.values]
            if len(xs) < 2 or len(xs) != len(ys):
                raise InvalidSystem("tabulated density needs matching abscissae/values (>= 2)")
            if any(y < 0 for y in ys):
                raise InvalidSystem("tabulated density has negative values")
            if any(xs[i + 1] <= xs[i] for i in range(len(xs) - 1)):
                raise InvalidSystem("tabulated abscissae must increase strictly")
            if xs[0] != a or xs[-1] != b:
                raise InvalidSystem("tabulated abscissae must span the interval exactly")
            if sum(1 for i in range(len(ys) - 1) if ys[i] > 0 or ys[i + 1] > 0) == 0:
                raise InvalidSystem("tabulated density vanishes identically")
        else:
            raise InvalidSystem(f"unsupported density kind {self.kind!r}")


def star_to_segment(interval, gamma, p: int):
    """Convert a radial power density given on the star to segment form.

    ``interval`` holds signed radii (negative for odd rays) and the density is
    ``|t|^gamma |dt|``.  Returns the segment interval and the exponent of
    ``|tau|``; the push-forward of ``|t|^gamma |dt|`` under ``t -> t^(p+1)`` is
    exactly ``|tau|^((gamma+1)/(p+1) - 1) dtau``.
    """
    a, b = (mp.mpf(x) for x in interval)
    e = p + 1
    lift = lambda r: -(abs(r) ** e) if r < 0 else r ** e  # noqa: E731
    lo, hi = sorted((lift(a), lift(b)))
    return (lo, hi), (mp.mpf(gamma) + 1) / e - 1


@dataclass(frozen=True)
class StarSystem:
    """``p`` generating measures on alternating half-lines."""

    p: int
    intervals: tuple
    densities: tuple

    @property
    def omega(self):
        return mp.exp(2j * mp.pi / (self.p + 1))


@dataclass(frozen=True)
class DiscreteMeasure:
    """Weighted point set on a real interval."""

    interval: tuple
    nodes: tuple
    weights: tuple
    declared_sign: int | None = 1

    def mass(self):
        return mp.fsum(self.weights)

    def moment(self, m: int):
        return mp.fsum(w * x**m for x, w in zip(self.nodes, self.weights))

    def integrate(self, f):
        return mp.fsum(w * f(x) for x, w in zip(self.nodes, self.weights))

    def cauchy(self, z):
        return cauchy_transform(self, z)


def cauchy_transform(m: DiscreteMeasure, z):
    """``sum_i w_i / (z - x_i)`` with a pole-proximity guard."""
    a, b = m.interval
    guard = POLE_GUARD * max(b - a, mp.mpf(1) if b == a else b - a)
    total = mp.zero
    for x, w in zip(m.nodes, m.weights):
        d = z - x
        if abs(d) < guard:
            raise PoleProximityError(f"point {mp.nstr(z, 8)} within {mp.nstr(guard, 3)} of a node")
        total += w / d
    return total


def validate_system(p: int, intervals: Sequence, densities: Sequence) -> StarSystem:
    """Check the sign pattern, origin disjointness and densities."""
    if int(p) != p or p < 1:
        raise InvalidSystem(f"p must be a positive integer, got {p}")
    if len(intervals) != p or len(densities) != p:
        raise InvalidSystem(f"need exactly {p} intervals and densities")
    ivs = []
    for k, (a, b) in enumerate(intervals):
        a, b = mp.mpf(a), mp.mpf(b)
        if not a < b:
            raise InvalidSystem(f"interval {k}: need a < b, got [{a}, {b}]")
        if k % 2 == 0 and a < 0:
            raise InvalidSystem(f"interval {k}: even index needs 0 <= a, got a = {a}")
        if k % 2 == 1 and b > 0:
            raise InvalidSystem(f"interval {k}: odd index needs b <= 0, got b = {b}")
        ivs.append((a, b))
    for k in range(p - 1):
        if ivs[k][0] == 0 and ivs[k + 1][1] == 0 or ivs[k][1] == 0 and ivs[k + 1][0] == 0:
            raise InvalidSystem(f"intervals {k} and {k + 1} both contain the origin")
    dens = []
    for k, d in enumerate(densities):
        if not isinstance(d, DensitySpec):
            raise InvalidSystem(f"density {k} is not a DensitySpec")
        try:
            d.validate(ivs[k])
        except InvalidSystem as exc:
            raise InvalidSystem(f"density {k}: {exc}") from None
        dens.append(d)
    return StarSystem(int(p), tuple(ivs), tuple(dens))


def segment_quadrature(density: DensitySpec, interval, order: int) -> DiscreteMeasure:
    """Gauss rule of the given order for ``density`` on ``interval``.

    Exact for polynomials of degree ``<= 2*order - 1``.  Jacobi kinds, and
    power kinds with the origin as an endpoint, use closed-form recurrence
    coefficients.  Power kinds away from the origin go through a Stieltjes
    procedure on a Fejer rule, and tabulated kinds through one on composite
    Gauss-Legendre cells.  Those two are exact up to the discretization error
    of the base rule.  For an integer exponent that error is zero.  Otherwise
    it decays geometrically with the distance from the interval to the origin.
    """
    if order < 1:
        raise ValueError("order must be >= 1")
    a, b = mp.mpf(interval[0]), mp.mpf(interval[1])
    kind = density.kind
    if kind == "power":
        g = mp.mpf(density.gamma)
        if g == 0:
            x, w = qd.gauss_jacobi(order, 0, 0, a, b)
        elif a == 0:
            x, w = qd.gauss_jacobi(order, g, 0, a, b)
        elif b == 0:
            x, w = qd.gauss_jacobi(order, 0, g, a, b)
        else:
            bx, bw = qd.fejer(4 * order + 64, a, b)
            x, w = qd.gauss_from_discrete(bx, [wi * abs(xi) ** g for xi, wi in zip(bx, bw)], order)
    elif kind == "jacobi":
        x, w = qd.gauss_jacobi(order, density.alpha, density.beta, a, b)
    elif kind == "tabulated":
        xs = [mp.mpf(t) for t in density.abscissae]
        ys = [mp.mpf(t) for t in density.values]
        gx, gw = qd.gauss_legendre(order + 1, -1, 1)
        bx, bw = [], []
        for i in range(len(xs) - 1):
            lo, hi = xs[i], xs[i + 1]
            if ys[i] == 0 and ys[i + 1] == 0:
                continue
            h, c = (hi - lo) / 2, (hi + lo) / 2
            for t, wt in zip(gx, gw):
                u = (t + 1) / 2
                bx.append(c + h * t)
                bw.append(h * wt * (ys[i] * (1 - u) + ys[i + 1] * u))
        x, w = qd.gauss_from_discrete(bx, bw, order)
    else:
        raise InvalidSystem(f"unsupported density kind {kind!r}")
    if not (a < x[0] and x[-1] < b):
        raise ArithmeticError("quadrature nodes escaped the interval")
    return DiscreteMeasure((a, b), tuple(x), tuple(w), 1)


@dataclass(frozen=True)
class MuHierarchy:
    """Discretized ``sigma*_k`` and the derived measures ``mu_{k,j}``.

    ``mu[(k, j)]`` shares the nodes of ``sigma*_k``; its weights are
    ``w_i * tau_i * mu_hat_{k+1,j}(tau_i)`` for ``j > k``.
    """

    system: StarSystem
    order: int
    prec: int
    sigma: tuple
    mu: dict = field(repr=False)

    @property
    def p(self) -> int:
        return self.system.p

    def interval(self, k: int):
        return self.system.intervals[k]

    def mu_hat(self, k: int, j: int, z):
        with mp.workprec(self.prec):
            return cauchy_transform(self.mu[(k, j)], z)

    def s_hat(self, k: int, j: int, z):
        """``z^(p+k-j) * mu_hat_{k,j}(z^(p+1))``."""
        p = self.p
        with mp.workprec(self.prec):
            z = mp.mpmathify(z)
            return z ** (p + k - j) * cauchy_transform(self.mu[(k, j)], z ** (p + 1))

    def ray_moment(self, j: int, i: int):
        """``int tau^i dmu_{0,j}``, the star moment of index ``j + i(p+1)``."""
        if i < 0:
            raise ValueError("i must be >= 0")
        with mp.workprec(self.prec):
            return self.mu[(0, j)].moment(i)

    def star_moment(self, j: int, l: int):
        """``int t^l ds_j(t)`` on the star; zero unless ``l = j mod (p+1)``."""
        p = self.p
        if l < 0 or (l - j) % (p + 1):
            return mp.zero
        return self.ray_moment(j, (l - j) // (p + 1))

    @cached_property
    def omega(self):
        with mp.workprec(self.prec):
            return mp.exp(2j * mp.pi / (self.p + 1))


def build_mu_hierarchy(system: StarSystem, quad_order: int = 96, prec: int = DEFAULT_PREC) -> MuHierarchy:
    """Discretize every ``sigma*_k`` and build the nested measures ``mu_{k,j}``."""
    p = system.p
    with mp.workprec(prec):
        sigma = tuple(
            segment_quadrature(system.densities[k], system.intervals[k], quad_order) for k in range(p)
        )
        mu = {(k, k): sigma[k] for k in range(p)}
        for k in range(p - 2, -1, -1):
            s = sigma[k]
            for j in range(k + 1, p):
                inner = mu[(k + 1, j)]
                w = tuple(
                    wi * x * cauchy_transform(inner, x) for x, wi in zip(s.nodes, s.weights)
                )
                sgn = 1 if all(wi > 0 for wi in w) else -1 if all(wi < 0 for wi in w) else None
                mu[(k, j)] = DiscreteMeasure(s.interval, s.nodes, w, sgn)
    return MuHierarchy(system, quad_order, prec, sigma, mu)
