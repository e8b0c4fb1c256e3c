"""Hermite-Pade approximants to the Cauchy transforms ``s^_j`` of the system.

The denominator is ``Q_n`` itself; the numerators are assembled from the star
moments of ``s_j``.  The remainder ``delta_{n,j}`` is computed along three
independent routes:

* ``s^_j - Q_{n,j} / Q_n``,
* ``Phi_{n,j+1} / Q_n`` with ``Phi`` integrated directly on the rays,
* ``Phi_{n,j+1} / Q_n`` with ``Phi`` assembled from the functions ``Psi_{n,i}``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from mpmath import mp

from .indices import hp_multiindex
from .measures import MuHierarchy, PoleProximityError
from .mop import QnRecord
from .polys import Poly
from .secondkind import SecondKind


class ZeroProximityError(ArithmeticError):
    """Evaluation point too close to a zero of ``Q_n``."""


def star_moments(h: MuHierarchy, j: int, count: int) -> list:
    """``int t^l ds_j(t)`` for ``l < count`` (zero off the residue class of ``j``)."""
    return [h.star_moment(j, l) for l in range(count)]


def numerators(h: MuHierarchy, rec: QnRecord) -> list[Poly]:
    """``Q_{n,j}(z) = int (Q_n(z) - Q_n(t)) / (z - t) ds_j(t)`` for ``j < p``.

    The coefficient of ``z^r`` is ``sum_{m > r} c_m M_{m-1-r}`` with ``c_m`` the
    coefficients of ``Q_n`` and ``M_l`` the star moments of ``s_j``.
    """
    n = rec.n
    with mp.workprec(h.prec):
        c = rec.Qn().coeffs
        out = []
        for j in range(h.p):
            M = star_moments(h, j, max(n, 1))
            coeffs = [mp.fsum(c[m] * M[m - 1 - r] for m in range(r + 1, n + 1)) for r in range(max(n, 1))]
            out.append(Poly(tuple(coeffs) if n else (mp.zero,)))
        return out


def laurent_defects(h: MuHierarchy, rec: QnRecord, j: int, extra: int = 3) -> list:
    """Relative size of the coefficients of ``z^-(s+1)`` in ``Q_n s^_j - Q_{n,j}``.

    Entry ``s`` is ``|sum_m c_m M_{m+s}| / sum_m |c_m M_{m+s}|`` for
    ``s < n_j + extra``; the first ``n_j`` entries vanish by the order
    condition, the rest generally do not.
    """
    n, p = rec.n, rec.p
    nj = hp_multiindex(n, p)[j]
    with mp.workprec(h.prec):
        c = rec.Qn().coeffs
        M = star_moments(h, j, n + nj + extra + 1)
        out = []
        for s in range(nj + extra):
            terms = [c[m] * M[m + s] for m in range(n + 1)]
            big = mp.fsum(abs(t) for t in terms)
            out.append(abs(mp.fsum(terms)) / big if big else mp.zero)
        return out


@dataclass
class HPApproximant:
    """Denominator ``Q_n`` and numerators ``Q_{n,j}`` for the diagonal multi-index."""

    n: int
    multiindex: tuple
    denominator: QnRecord
    numerators: list

    def approximant(self, j: int, z):
        return self.numerators[j](z) / self.denominator(z)


def build_approximant(h: MuHierarchy, rec: QnRecord) -> HPApproximant:
    return HPApproximant(rec.n, hp_multiindex(rec.n, rec.p), rec, numerators(h, rec))


def s_hat(h: MuHierarchy, j: int, z):
    """``s^_j(z) = s^_{0,j}(z)``."""
    return h.s_hat(0, j, z)


def phi_direct(h: MuHierarchy, rec: QnRecord, j: int, z):
    """``Phi_{n,j+1}(z) = int Q_n(t) / (z - t) ds_j(t)`` integrated on the rays.

    On ray ``m`` (direction ``omega^m``) the measure ``s_j`` is
    ``omega^(-jm)`` times the push-forward of ``dmu_{0,j}(tau) / ((p+1) r^j)``,
    ``r = tau^(1/(p+1))``.
    """
    p = h.p
    with mp.workprec(h.prec):
        z = mp.mpmathify(z)
        om = h.omega
        mu = h.mu[(0, j)]
        total = mp.zero
        for tau, w in zip(mu.nodes, mu.weights):
            r = mp.root(tau, p + 1)
            c = w / ((p + 1) * r**j)
            for m in range(p + 1):
                t = om**m * r
                d = z - t
                if abs(d) < mp.mpf("1e-30"):
                    raise PoleProximityError("evaluation point on a node of s_j")
                total += c * om ** (-j * m) * rec(t) / d
        return total


def phi_via_psi(h: MuHierarchy, sk: SecondKind, k: int, z):
    """``Phi_{n,k} = sum_{i=1}^k (-1)^(i-1) s^_{i,k-1} Psi_{n,i}`` (``s^_{k,k-1} = 1``)."""
    with mp.workprec(h.prec):
        z = mp.mpmathify(z)
        total = mp.zero
        for i in range(1, k + 1):
            fac = mp.one if i == k else h.s_hat(i, k - 1, z)
            total += (-1) ** (i - 1) * fac * sk.Psi(i, z)
        return total


def zero_exclusion_radius(h: MuHierarchy) -> float:
    a, b = h.interval(0)
    return 1e-3 * float(b - a) ** (1.0 / (h.p + 1))


def _guard(h: MuHierarchy, rec: QnRecord, z) -> None:
    rad = zero_exclusion_radius(h)
    zc = complex(z)
    if rec.ell and abs(zc) < rad:
        raise ZeroProximityError("evaluation point near the zero of Q_n at the origin")
    for t in rec.star_zeros:
        if abs(zc - complex(t)) < rad:
            raise ZeroProximityError(f"evaluation point within {rad:.3g} of a zero of Q_n")


@dataclass(frozen=True)
class Remainder:
    """``delta_{n,j}(z)`` along the three routes and their relative discrepancies."""

    via_numerator: object
    via_direct: object
    via_psi: object

    @property
    def value(self):
        return self.via_direct

    @property
    def discrepancy(self):
        ref = abs(self.via_direct)
        return max(abs(self.via_numerator - self.via_direct), abs(self.via_psi - self.via_direct)) / ref


def remainder(h: MuHierarchy, rec: QnRecord, j: int, z, approx: HPApproximant | None = None,
              sk: SecondKind | None = None) -> Remainder:
    """``delta_{n,j}(z)`` computed three ways."""
    _guard(h, rec, z)
    if approx is None:
        approx = build_approximant(h, rec)
    if sk is None:
        sk = SecondKind(h, rec)
    with mp.workprec(h.prec):
        z = mp.mpmathify(z)
        Qz = rec(z)
        d1 = s_hat(h, j, z) - approx.numerators[j](z) / Qz
        d2 = phi_direct(h, rec, j, z) / Qz
        d3 = phi_via_psi(h, sk, j + 1, z) / Qz
        return Remainder(d1, d2, d3)


def delta_prediction(eq, z) -> np.ndarray:
    """``-U^{mu~_1} + 2 U^{mu~_0} - (2/(p+1)) w_0``, the limit of ``log|delta_{n,j}|^(1/n)``."""
    from .asymptotics import lifted_potential

    p = eq.p
    return -lifted_potential(eq, 1, z) + 2 * lifted_potential(eq, 0, z) - 2.0 / (p + 1) * float(eq.constants[0])


def dominance_ratios(h: MuHierarchy, sk: SecondKind, z) -> list:
    """``|s^_{i+1,p-1} Psi_{n,i+1}| / |s^_{1,p-1} Psi_{n,1}|`` for ``1 <= i < p``."""
    p = h.p
    with mp.workprec(h.prec):
        z = mp.mpmathify(z)
        base = abs(h.s_hat(1, p - 1, z) * sk.Psi(1, z)) if p > 1 else abs(sk.Psi(1, z))
        out = []
        for i in range(1, p):
            fac = mp.one if i + 1 == p else h.s_hat(i + 1, p - 1, z)
            out.append(abs(fac * sk.Psi(i + 1, z)) / base)
        return out
