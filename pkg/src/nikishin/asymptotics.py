"""Finite-n objects against their potential-theoretic limits.

Weak-star convergence is measured by the Kolmogorov distance between
cumulative distribution functions.  All nth-root comparisons are made in log
space.  Potentials come from an :class:`~nikishin.equilibrium.EquilibriumResult`
whose components live on the segments ``[a_k, b_k]``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from mpmath import mp

from .equilibrium import EquilibriumResult, GridMeasure
from .indices import Z
from .recurrence import RecurrenceSequence
from .secondkind import SecondKind


@dataclass(frozen=True)
class EmpiricalMeasure:
    """Equal masses ``1/len(atoms)`` at the sorted atoms."""

    atoms: tuple
    interval: tuple

    def __post_init__(self):
        a = tuple(sorted(float(x) for x in self.atoms))
        lo, hi = self.interval
        if a and (a[0] < lo or a[-1] > hi):
            raise ValueError("atoms outside the declared interval")
        object.__setattr__(self, "atoms", a)

    @property
    def n(self) -> int:
        return len(self.atoms)


def _as_cdf(target) -> Callable:
    if isinstance(target, GridMeasure):
        tot = float(target.mass)
        return lambda x: target.cdf(x) / tot
    return target


def weakstar_distance(emp: EmpiricalMeasure, target) -> float:
    """``sup_x |F_emp(x) - F(x)|``.

    ``target`` is a :class:`GridMeasure` (normalized to unit mass here) or a
    vectorized CDF.  The supremum is attained at the atoms, on one side of a
    jump or the other.
    """
    if emp.n == 0:
        raise ValueError("empty empirical measure")
    F = _as_cdf(target)
    x = np.array(emp.atoms)
    Fx = np.asarray(F(x), dtype=float)
    # for tied atoms, the step spans from the first to the last copy
    lo = np.searchsorted(x, x, side="left") / emp.n
    hi = np.searchsorted(x, x, side="right") / emp.n
    return float(max(np.abs(Fx - lo).max(), np.abs(Fx - hi).max()))


def check_zero_distribution(sk: SecondKind, k: int, eq: EquilibriumResult) -> float:
    """Distance between ``mu_{P_{n,k}}`` and ``mu_k`` normalized to unit mass."""
    zs = sk.zeros(k)
    emp = EmpiricalMeasure(tuple(float(z) for z in zs), eq.measures[k].interval)
    return weakstar_distance(emp, eq.measures[k])


@dataclass(frozen=True)
class StarMeasure:
    """Rotationally symmetric lift of a segment measure to ``p + 1`` rays.

    Ray ``j`` points along ``omega_j``, a root of ``z^(p+1) = sign``, where
    ``sign`` is that of the segment.  Each ray carries ``1/(p+1)`` of the mass.
    """

    base: GridMeasure
    p: int

    @property
    def sign(self) -> int:
        a, b = self.base.interval
        return -1 if b <= 0 else 1

    def directions(self) -> np.ndarray:
        e = self.p + 1
        off = 0.5 if self.sign < 0 else 0.0
        return np.exp(2j * np.pi * (np.arange(e) + off) / e)

    def radius_to_tau(self, r):
        return self.sign * np.abs(np.asarray(r, dtype=float)) ** (self.p + 1)

    def ray_cdf(self, j: int, r) -> np.ndarray:
        """Mass of ray ``j`` within distance ``r`` of the origin."""
        if not 0 <= j <= self.p:
            raise IndexError("ray index out of range")
        tau = self.radius_to_tau(r)
        F = self.base.cdf(tau)
        if self.sign < 0:
            F = float(np.sum(self.base.weights)) - F
        return F / (self.p + 1)

    def radial_cdf(self, r) -> np.ndarray:
        """Total mass within distance ``r`` of the origin, normalized."""
        return sum(self.ray_cdf(j, r) for j in range(self.p + 1)) / float(self.base.mass)

    def potential(self, z, order: int = 8) -> np.ndarray:
        """``U(z)`` by direct quadrature on the rays (independent of the lift identity)."""
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        gx, gw = np.polynomial.legendre.leggauss(order)
        gx, gw = (gx + 1) / 2, gw / 2
        e = self.base.edges
        h = np.diff(e)
        tau = (e[:-1, None] + h[:, None] * gx[None, :]).ravel()
        wts = (self.base.density[:, None] * h[:, None] * gw[None, :]).ravel()
        r = np.abs(tau) ** (1.0 / (self.p + 1))
        out = np.zeros(z.shape)
        for d in self.directions():
            pts = d * r
            out += -np.log(np.abs(z[:, None] - pts[None, :])) @ wts
        return out / (self.p + 1)


def star_zero_distance(rec, eq: EquilibriumResult) -> float:
    """Radial Kolmogorov distance between ``mu_{Q_n}`` and the lift of ``mu_0``.

    The ``ell`` zeros at the origin count at radius 0; the ``p + 1`` copies of
    every segment zero share the radius ``|tau|^(1/(p+1))``.
    """
    p, n, ell = rec.p, rec.n, rec.ell
    radii = np.sort(np.abs(np.array([float(t) for t in rec.segment_zeros])) ** (1.0 / (p + 1)))
    lift = StarMeasure(eq.measures[0], p)
    F = lift.radial_cdf(radii)
    before = (ell + (p + 1) * np.arange(len(radii))) / n
    after = (ell + (p + 1) * np.arange(1, len(radii) + 1)) / n
    origin = ell / n  # jump at r = 0, where the target CDF vanishes
    return float(max(np.abs(F - before).max(initial=0.0), np.abs(F - after).max(initial=0.0), origin))


def lifted_potential(eq: EquilibriumResult, k: int, z) -> np.ndarray:
    """``U^{mu~_k}(z) = U^{mu_k}(z^(p+1)) / (p+1)``; zero for ``k = -1, p``."""
    p = eq.p
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    return eq.potential(k, z ** (p + 1)) / (p + 1)


def nthroot_psi_prediction(eq: EquilibriumResult, k: int, z) -> np.ndarray:
    """``-U^{mu_k} + U^{mu_{k-1}} - 2 sum_{j<k} w_j`` at segment-plane points."""
    return -eq.potential(k, z) + eq.potential(k - 1, z) - 2 * float(np.sum(eq.constants[:k]))


def nthroot_Psi_prediction(eq: EquilibriumResult, k: int, z) -> np.ndarray:
    """Star version: ``-U^{mu~_k} + U^{mu~_{k-1}} - (2/(p+1)) sum_{j<k} w_j``."""
    p = eq.p
    return (
        -lifted_potential(eq, k, z)
        + lifted_potential(eq, k - 1, z)
        - 2.0 / (p + 1) * float(np.sum(eq.constants[:k]))
    )


@dataclass(frozen=True)
class NthRootCheck:
    """Observed and predicted log-nth-roots at the probes."""

    observed: np.ndarray
    predicted: np.ndarray

    @property
    def abs_error(self) -> float:
        return float(np.abs(self.observed - self.predicted).max())

    @property
    def rel_error(self) -> float:
        """Max of ``|obs - pred| / max(|pred|, 1)``."""
        return float((np.abs(self.observed - self.predicted) / np.maximum(np.abs(self.predicted), 1.0)).max())

    @property
    def ratio_error(self) -> float:
        """Max of ``|exp(obs - pred) - 1|`` (relative error of the nth roots)."""
        return float(np.abs(np.expm1(self.observed - self.predicted)).max())


def check_nthroot_psi(sk: SecondKind, k: int, eq: EquilibriumResult, probes) -> NthRootCheck:
    """``log|psi_{n,k}(z)| / Z(n,0)`` against its limit at segment-plane probes."""
    probes = np.asarray(probes, dtype=complex)
    z0 = Z(sk.n, 0, sk.p)
    with mp.workprec(sk.prec):
        obs = np.array([float(mp.log(abs(sk.psi(k, mp.mpc(z))))) / z0 for z in probes])
    return NthRootCheck(obs, nthroot_psi_prediction(eq, k, probes))


def check_nthroot_Psi(sk: SecondKind, k: int, eq: EquilibriumResult, probes) -> NthRootCheck:
    """``log|Psi_{n,k}(z)| / n`` against its limit at star probes."""
    probes = np.asarray(probes, dtype=complex)
    with mp.workprec(sk.prec):
        obs = np.array([float(mp.log(abs(sk.Psi(k, mp.mpc(z))))) / sk.n for z in probes])
    return NthRootCheck(obs, nthroot_Psi_prediction(eq, k, probes))


def K_limit(sk: SecondKind, k: int, eq: EquilibriumResult) -> tuple[float, float]:
    """``log K_{n,k} / Z(n,0)`` and its limit ``sum_{j<=k} w_j``."""
    with mp.workprec(sk.prec):
        obs = float(mp.log(sk.K(k))) / Z(sk.n, 0, sk.p)
    return obs, float(np.sum(eq.constants[: k + 1]))


def an_geometric_mean(a: RecurrenceSequence, k: int, m: int) -> float:
    """``(prod_{j=1}^m a_{pj+k})^(1/m)``, accumulated in log space."""
    p = a.p
    idx = [p * j + k for j in range(1, m + 1)]
    missing = [n for n in idx if n not in a.a]
    if missing:
        raise KeyError(f"recurrence coefficients missing for n = {missing[:5]}")
    return float(mp.exp(mp.fsum(mp.log(a.a[n]) for n in idx) / m))


def an_prediction(p: int, k: int, constants: Sequence) -> float:
    """``exp(-(2p/(p+1)) sum_{j<=k} w_j)``."""
    return float(np.exp(-2.0 * p / (p + 1) * float(np.sum(np.asarray(constants)[: k + 1]))))


def check_an_geometric_mean(a: RecurrenceSequence, k: int, eq: EquilibriumResult | Sequence, m: int) -> float:
    """Relative error of the geometric mean against its limit."""
    w = eq.constants if isinstance(eq, EquilibriumResult) else eq
    pred = an_prediction(a.p, k, w)
    return abs(an_geometric_mean(a, k, m) - pred) / pred


def geometric_mean_table(a: RecurrenceSequence, k: int, constants: Sequence, ms: Sequence[int]) -> list[tuple]:
    """Rows ``(m, geometric mean, prediction, relative error)``."""
    pred = an_prediction(a.p, k, constants)
    rows = []
    for m in ms:
        g = an_geometric_mean(a, k, m)
        rows.append((m, g, pred, abs(g - pred) / pred))
    return rows


def probe_circles(radii: Sequence[float], count: int = 6, phase: float = np.pi / 6) -> np.ndarray:
    """``count`` points per circle at angles ``phase + 2 pi m / count``."""
    th = phase + 2 * np.pi * np.arange(count) / count
    return np.concatenate([r * np.exp(1j * th) for r in radii])


def segment_probes(intervals: Sequence, count: int = 6) -> np.ndarray:
    """Two circles about the origin that miss the real axis (12 points by default)."""
    R = max(max(abs(float(a)), abs(float(b))) for a, b in intervals)
    return probe_circles([0.75 * R, 1.5 * R], count)


def star_probes(p: int, intervals: Sequence, radii: Sequence[float] | None = None) -> np.ndarray:
    """Two circles of ``2(p+1)`` points, each midway between adjacent rays."""
    if radii is None:
        rho = max(max(abs(float(a)), abs(float(b))) for a, b in intervals) ** (1.0 / (p + 1))
        radii = [1.2 * rho, 2.4 * rho]
    count = 2 * (p + 1)
    return probe_circles(radii, count, np.pi / count)
