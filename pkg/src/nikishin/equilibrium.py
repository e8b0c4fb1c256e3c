"""Vector equilibrium problem for the Nikishin interaction.

Every component lives on a real interval ``E_k`` and is discretized as a
piecewise-constant density on ``M`` Chebyshev-spaced cells (denser near the
endpoints, where equilibrium densities blow up like inverse square roots).
Cell-cell and point-cell log-kernel integrals use exact antiderivatives for
nearby pairs and a tensor Gauss rule for well separated pairs.

The energy to minimize is

    J(nu) = sum_k I(nu_k) - sum_k I(nu_k, nu_{k+1}),   ||nu_k|| = 1 - k/p,

a convex quadratic form in the cell masses.  Double precision is used
throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

_NEAR = 4.0
_GX, _GW = np.polynomial.legendre.leggauss(4)
_GX, _GW = (_GX + 1) / 2, _GW / 2


class EquilibriumError(ArithmeticError):
    """Invalid input for, or failure of, an equilibrium computation."""


class ConvergenceError(EquilibriumError):
    """Solver did not meet its stopping rule within the iteration budget."""


def chebyshev_edges(a: float, b: float, M: int) -> np.ndarray:
    """``M + 1`` cell edges ``a + (b-a)(1 - cos(pi i / M)) / 2``."""
    if M < 1:
        raise ValueError("M must be >= 1")
    i = np.arange(M + 1)
    e = a + (b - a) * (1 - np.cos(np.pi * i / M)) / 2
    e[0], e[-1] = a, b
    return e


@dataclass
class GridMeasure:
    """Piecewise-constant measure: ``weights[i]`` is the mass of cell ``i``."""

    interval: tuple
    edges: np.ndarray
    weights: np.ndarray
    mass: Fraction | float = 1.0

    def __post_init__(self):
        self.edges = np.asarray(self.edges, dtype=float)
        self.weights = np.asarray(self.weights, dtype=float)
        if len(self.edges) != len(self.weights) + 1:
            raise EquilibriumError("need one more edge than weights")
        if np.any(np.diff(self.edges) <= 0):
            raise EquilibriumError("cell edges must increase strictly")
        a, b = self.interval
        if self.edges[0] != a or self.edges[-1] != b:
            raise EquilibriumError("cells must partition the interval")

    @property
    def M(self) -> int:
        return len(self.weights)

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.edges)

    @property
    def midpoints(self) -> np.ndarray:
        return (self.edges[1:] + self.edges[:-1]) / 2

    @property
    def density(self) -> np.ndarray:
        return self.weights / self.widths

    def mass_defect(self) -> float:
        """``|sum(weights) - mass|`` with exact rational accumulation."""
        s = sum((Fraction(w) for w in self.weights), Fraction(0))
        return float(abs(s - Fraction(self.mass)))

    def cdf(self, x) -> np.ndarray:
        """Cumulative distribution (unnormalized) at the points ``x``."""
        x = np.clip(np.asarray(x, dtype=float), self.edges[0], self.edges[-1])
        cum = np.concatenate(([0.0], np.cumsum(self.weights)))
        i = np.clip(np.searchsorted(self.edges, x, side="right") - 1, 0, self.M - 1)
        return cum[i] + self.density[i] * (x - self.edges[i])

    def potential(self, z) -> np.ndarray:
        """``U(z) = int log(1/|z - t|) dnu(t)`` at real or complex points."""
        return -point_cell_matrix(z, self.edges) @ self.density

    def scaled(self, c) -> "GridMeasure":
        return GridMeasure(self.interval, self.edges, self.weights * float(c), Fraction(self.mass) * Fraction(c))


# -- log-kernel integrals ---------------------------------------------------
def _F(u):
    """``F'' = log|u|``: ``u^2 log|u| / 2 - 3 u^2 / 4`` (0 at 0)."""
    u = np.asarray(u, dtype=float)
    au = np.abs(u)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(au > 0, u * u * np.log(np.where(au > 0, au, 1.0)) / 2 - 0.75 * u * u, 0.0)
    return out


def _G(u):
    """``G' = log|u|`` for complex ``u``: ``Re(u log u) - Re u`` (0 at 0)."""
    u = np.asarray(u, dtype=complex)
    au = np.abs(u)
    with np.errstate(divide="ignore", invalid="ignore"):
        lg = np.log(np.where(au > 0, u, 1.0))
        out = np.where(au > 0, (u * lg).real - u.real, 0.0)
    return out


def cell_cell_matrix(ex: np.ndarray, ey: np.ndarray) -> np.ndarray:
    """``L[i, j] = int_{cell_i} int_{cell_j} log|x - y| dy dx``.

    Pairs whose gap is below four times the larger width use the exact
    antiderivative; the rest use a 4 x 4 Gauss rule.
    """
    x0, x1 = ex[:-1, None], ex[1:, None]
    y0, y1 = ey[None, :-1], ey[None, 1:]
    hx, hy = x1 - x0, y1 - y0
    gap = np.maximum(np.maximum(y0 - x1, x0 - y1), 0.0)
    near = gap < _NEAR * np.maximum(hx, hy)
    out = np.zeros((len(ex) - 1, len(ey) - 1))
    for ga, wa in zip(_GX, _GW):
        xa = x0 + hx * ga
        for gb, wb in zip(_GX, _GW):
            with np.errstate(divide="ignore"):
                out += wa * wb * np.log(np.abs(xa - (y0 + hy * gb)))
    out *= hx * hy
    I, J = np.nonzero(near)
    if len(I):
        a0, a1, b0, b1 = ex[I], ex[I + 1], ey[J], ey[J + 1]
        out[I, J] = _F(a1 - b0) - _F(a1 - b1) - _F(a0 - b0) + _F(a0 - b1)
    return out


def point_cell_matrix(z, edges: np.ndarray) -> np.ndarray:
    """``L[m, j] = int_{cell_j} log|z_m - t| dt`` for real or complex ``z``."""
    z = np.atleast_1d(np.asarray(z, dtype=complex)).reshape(-1, 1)
    t0, t1 = edges[None, :-1], edges[None, 1:]
    h = t1 - t0
    dist = np.abs(z - np.clip(z.real, t0, t1))
    near = dist < _NEAR * h
    out = np.zeros((z.shape[0], len(edges) - 1))
    for g, w in zip(_GX, _GW):
        with np.errstate(divide="ignore"):
            out += w * np.log(np.abs(z - (t0 + h * g)))
    out *= h
    I, J = np.nonzero(near)
    if len(I):
        zz = z[I, 0]
        out[I, J] = _G(zz - edges[J]) - _G(zz - edges[J + 1])
    return out


def interaction(m1: GridMeasure, m2: GridMeasure) -> float:
    """``I(m1, m2) = int int log(1/|x - y|) dm1 dm2``."""
    L = cell_cell_matrix(m1.edges, m2.edges)
    return float(-(m1.density @ L @ m2.density))


def _check_consecutive(vec: Sequence[GridMeasure]) -> None:
    for k in range(len(vec) - 1):
        (a, b), (c, d) = vec[k].interval, vec[k + 1].interval
        if max(a, c) < min(b, d):
            raise EquilibriumError(f"supports of components {k} and {k + 1} overlap")


def energy(vec: Sequence[GridMeasure]) -> float:
    """``J = sum I(nu_k) - sum I(nu_k, nu_{k+1})``."""
    _check_consecutive(vec)
    J = sum(interaction(m, m) for m in vec)
    J -= sum(interaction(vec[k], vec[k + 1]) for k in range(len(vec) - 1))
    return J


# -- the discrete problem -----------------------------------------------------
def interaction_matrix(p: int) -> np.ndarray:
    """``p x p`` tridiagonal matrix with 1 on the diagonal and -1/2 beside it."""
    A = np.eye(p)
    for k in range(p - 1):
        A[k, k + 1] = A[k + 1, k] = -0.5
    return A


def convexity_certificate(p: int) -> bool:
    """Cholesky test of ``interaction_matrix(p)``."""
    try:
        np.linalg.cholesky(interaction_matrix(p))
    except np.linalg.LinAlgError:
        return False
    return True


def project_simplex(v: np.ndarray, mass: float) -> np.ndarray:
    """Euclidean projection onto ``{x >= 0, sum x = mass}``."""
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - mass
    idx = np.arange(1, len(v) + 1)
    r = np.nonzero(u - css / idx > 0)[0][-1]
    return np.maximum(v - css[r] / (r + 1), 0.0)


@dataclass
class _Problem:
    edges: list
    masses: list
    H: np.ndarray  # J(x) = x^T H x, x = stacked cell masses
    blocks: list

    @property
    def p(self) -> int:
        return len(self.edges)

    def split(self, x: np.ndarray) -> list:
        return [x[s] for s in self.blocks]


def _build_problem(intervals: Sequence, M: int, fields: Sequence | None = None) -> _Problem:
    p = len(intervals)
    edges = [chebyshev_edges(float(a), float(b), M) for a, b in intervals]
    masses = [Fraction(p - k, p) for k in range(p)]
    n = p * M
    H = np.zeros((n, n))
    blocks = [slice(k * M, (k + 1) * M) for k in range(p)]
    for k in range(p):
        hk = np.diff(edges[k])
        # I(nu) = -sum_ij x_i x_j L_ij / (h_i h_j)
        H[blocks[k], blocks[k]] = -cell_cell_matrix(edges[k], edges[k]) / np.outer(hk, hk)
        if k + 1 < p:
            hk1 = np.diff(edges[k + 1])
            C = 0.5 * cell_cell_matrix(edges[k], edges[k + 1]) / np.outer(hk, hk1)
            H[blocks[k], blocks[k + 1]] = C
            H[blocks[k + 1], blocks[k]] = C.T
    H = (H + H.T) / 2
    return _Problem(edges, masses, H, blocks)


def tangent_cholesky(H: np.ndarray, blocks: Sequence[slice]) -> bool:
    """Cholesky test of ``H`` restricted to per-block zero-sum directions.

    The basis ``e_i - e_{i+1}`` inside each block spans that subspace.
    """
    idx = []
    for s in blocks:
        r = np.arange(s.start, s.stop)
        idx.extend(zip(r[:-1], r[1:]))
    D = np.zeros((len(idx), H.shape[0]))
    for row, (i, j) in enumerate(idx):
        D[row, i], D[row, j] = 1.0, -1.0
    try:
        np.linalg.cholesky(D @ H @ D.T)
    except np.linalg.LinAlgError:
        return False
    return True


def _pgd(prob: _Problem, lin: np.ndarray, max_iter: int, rtol: float, window: int):
    """Projected gradient with Barzilai-Borwein steps on ``x^T H x + lin^T x``."""
    H = prob.H
    x = np.concatenate([np.full(len(e) - 1, float(m) / (len(e) - 1)) for e, m in zip(prob.edges, prob.masses)])

    def proj(v):
        return np.concatenate([project_simplex(v[s], float(m)) for s, m in zip(prob.blocks, prob.masses)])

    def f(v):
        Hv = H @ v
        return float(v @ Hv + lin @ v), 2 * Hv + lin

    fx, g = f(x)
    step = 1.0 / max(np.abs(H).sum(axis=1).max(), 1e-300)
    hist = [fx]
    for it in range(1, max_iter + 1):
        while True:
            xn = proj(x - step * g)
            fn, gn = f(xn)
            # nonmonotone (max over the window) sufficient decrease
            if fn <= max(hist[-window:]) - 1e-4 * float(g @ (x - xn)) or step < 1e-300:
                break
            step /= 2
        s, y = xn - x, gn - g
        sy = float(s @ y)
        step = float(s @ s) / sy if sy > 0 else step * 2
        x, fx, g = xn, fn, gn
        hist.append(fx)
        if it >= window:
            ref = hist[-window - 1]
            if abs(ref - fx) <= rtol * max(abs(fx), 1.0):
                return x, it
    raise ConvergenceError(f"projected gradient did not converge in {max_iter} iterations")


def _kkt_polish(prob: _Problem, lin: np.ndarray, x: np.ndarray, max_rounds: int = 50):
    """Active-set solve of the KKT system starting from the support of ``x``.

    On the active cells of block ``k``: ``2 (H x)_i + lin_i = 2 lam_k``; the
    block masses are prescribed.  Cells with negative mass leave the active
    set; inactive cells with a negative reduced gradient join it.
    """
    H, p = prob.H, prob.p
    n = H.shape[0]
    blk = np.empty(n, dtype=int)
    for k, s in enumerate(prob.blocks):
        blk[s] = k
    tiny = 1e-14 * max(float(m) for m in prob.masses) / n
    active = x > tiny
    for s in prob.blocks:
        if not active[s].any():
            active[s] = True
    for _ in range(max_rounds):
        A = np.nonzero(active)[0]
        na = len(A)
        K = np.zeros((na + p, na + p))
        K[:na, :na] = 2 * H[np.ix_(A, A)]
        K[np.arange(na), na + blk[A]] = -2.0
        K[na + blk[A], np.arange(na)] = 1.0
        rhs = np.concatenate([-lin[A], [float(m) for m in prob.masses]])
        sol = np.linalg.solve(K, rhs)
        xa, lam = sol[:na], sol[na:]
        if (xa < 0).any():
            drop = A[xa < 0]
            active[drop] = False
            x = np.zeros(n)
            x[A] = np.maximum(xa, 0)
            continue
        x = np.zeros(n)
        x[A] = xa
        red = 2 * (H @ x) + lin - 2 * lam[blk]
        scale = np.abs(2 * (H @ x)).max() + np.abs(lin).max() + 1.0
        add = (~active) & (red < -1e-12 * scale)
        if not add.any():
            return x, lam
        active |= add
    raise ConvergenceError("active-set polish did not settle")


@dataclass
class EquilibriumResult:
    """Solution of a vector (or scalar-with-field) equilibrium problem.

    ``constants`` are read out pointwise (mass-weighted average of ``W_k``
    at the midpoints of cells holding more than ``mass / (2M)``); ``spread``
    holds the max - min of ``W_k`` over those cells and ``multipliers`` the
    cell-averaged constants from the discrete KKT system.
    """

    measures: list
    constants: np.ndarray
    spread: np.ndarray
    multipliers: np.ndarray
    residual_profiles: list
    energy: float
    iterations: int
    meta: dict = field(default_factory=dict)

    @property
    def p(self) -> int:
        return len(self.measures)

    def potential(self, k: int, z) -> np.ndarray:
        """``U^{mu_k}(z)``, zero for ``k = -1`` and ``k = p``."""
        if k < 0 or k >= self.p:
            return np.zeros(np.shape(np.atleast_1d(z)))
        return self.measures[k].potential(z)


def combined_potential(result: EquilibriumResult, k: int, x) -> np.ndarray:
    """``W_k = U^{mu_k} - U^{mu_{k-1}} / 2 - U^{mu_{k+1}} / 2``."""
    return result.potential(k, x) - 0.5 * result.potential(k - 1, x) - 0.5 * result.potential(k + 1, x)


def _readout(m: GridMeasure, W: np.ndarray):
    sel = m.weights > float(m.mass) / (2 * m.M)
    if not sel.any():
        sel = m.weights > 0
    w = float(np.sum(m.weights[sel] * W[sel]) / np.sum(m.weights[sel]))
    return w, float(W[sel].max() - W[sel].min())


def solve_vector_equilibrium(
    intervals: Sequence,
    M: int = 400,
    tol: float | None = None,
    max_iter: int = 100_000,
    rtol: float = 1e-12,
    window: int = 50,
) -> EquilibriumResult:
    """Minimize ``J`` over admissible vector measures on the given intervals.

    Projected gradient with Barzilai-Borwein steps from a uniform start,
    followed by an active-set solve of the discrete KKT system.  ``tol``
    bounds the variational residuals on the cells (default ``5 log(M) / M``);
    a violation raises ``ConvergenceError``.
    """
    p = len(intervals)
    if p < 1:
        raise EquilibriumError("need at least one interval")
    ivs = [(float(a), float(b)) for a, b in intervals]
    for k, (a, b) in enumerate(ivs):
        if not a < b:
            raise EquilibriumError(f"interval {k} has no interior")
        if k + 1 < p and max(a, ivs[k + 1][0]) < min(b, ivs[k + 1][1]):
            raise EquilibriumError(f"intervals {k} and {k + 1} overlap")
    if tol is None:
        tol = 5 * math.log(M) / M
    prob = _build_problem(ivs, M)
    lin = np.zeros(prob.H.shape[0])
    x, iters = _pgd(prob, lin, max_iter, rtol, window)
    x, lam = _kkt_polish(prob, lin, x)
    return _finish(prob, x, lam, iters, tol, fields=None)


def _finish(prob: _Problem, x, lam, iters, tol, fields):
    p = prob.p
    parts = prob.split(x)
    ms = [
        GridMeasure((e[0], e[-1]), e, np.maximum(w, 0.0), m) for e, w, m in zip(prob.edges, parts, prob.masses)
    ]
    mids = [m.midpoints for m in ms]
    W = []
    for k in range(p):
        Wk = ms[k].potential(mids[k])
        for j in (k - 1, k + 1):
            if 0 <= j < p and fields is None:
                Wk = Wk - 0.5 * ms[j].potential(mids[k])
        if fields is not None:
            Wk = Wk + fields[k]
        W.append(Wk)
    consts, spread = zip(*(_readout(ms[k], W[k]) for k in range(p)))
    consts = np.array(consts)
    profiles = [W[k] - consts[k] for k in range(p)]
    J = float(x @ prob.H @ x)
    for k in range(p):
        supp = ms[k].weights > float(ms[k].mass) / (2 * ms[k].M)
        r = profiles[k]
        if np.abs(r[supp]).max() > tol or r.min() < -tol:
            raise ConvergenceError(
                f"component {k}: variational residual {np.abs(r[supp]).max():.3g} / {r.min():.3g} beyond {tol:.3g}"
            )
    return EquilibriumResult(
        ms, consts, np.array(spread), np.asarray(lam), profiles, J, iters, {"tol": tol, "M": prob.edges[0].size - 1}
    )


def scalar_equilibrium_with_field(
    interval,
    field: Callable | np.ndarray | None,
    M: int = 400,
    tol: float | None = None,
    max_iter: int = 100_000,
    rtol: float = 1e-12,
    window: int = 50,
) -> tuple[GridMeasure, float]:
    """Equilibrium probability measure on ``interval`` in the field ``phi``.

    Minimizes ``I(mu) + 2 int phi dmu`` so that ``U^mu + phi = w`` on the
    support.  ``field`` is a callable evaluated at the cell midpoints or an
    array of per-cell values.  Returns the measure and ``w``.
    """
    a, b = float(interval[0]), float(interval[1])
    if tol is None:
        tol = 5 * math.log(M) / M
    prob = _build_problem([(a, b)], M)
    prob.masses = [Fraction(1)]
    mids = (prob.edges[0][1:] + prob.edges[0][:-1]) / 2
    if field is None:
        phi = np.zeros(M)
    elif callable(field):
        phi = np.asarray(field(mids), dtype=float)
    else:
        phi = np.asarray(field, dtype=float)
    if phi.shape != (M,) or not np.all(np.isfinite(phi)):
        raise EquilibriumError("field must give one finite value per cell")
    lin = 2 * phi
    x, iters = _pgd(prob, lin, max_iter, rtol, window)
    x, lam = _kkt_polish(prob, lin, x)
    res = _finish(prob, x, lam, iters, tol, fields=[phi])
    return res.measures[0], float(res.constants[0])


def lemma_probes(result: EquilibriumResult, k: int, count: int = 20) -> np.ndarray:
    """Probe points off ``supp mu_k``: real points beside it and a complex ring."""
    a, b = result.measures[k].interval
    L = b - a
    c = (a + b) / 2
    nreal = count // 2
    offs = L * np.geomspace(1e-2, 3.0, nreal // 2)
    real = np.concatenate([a - offs, b + offs])
    th = np.pi * (np.arange(count - len(real)) + 0.5) / (count - len(real))
    ring = c + 0.75 * L * np.exp(1j * th)
    return np.concatenate([real.astype(complex), ring])


def lemma_inequality(result: EquilibriumResult, k: int, probes) -> np.ndarray:
    """``2 U^{mu_k} - U^{mu_{k-1}} - U^{mu_{k+1}} - 2 w_k`` at the probes (should be < 0)."""
    z = np.asarray(probes, dtype=complex)
    return 2 * combined_potential(result, k, z) - 2 * result.constants[k]


def support_fraction(m: GridMeasure) -> float:
    """Fraction of cells holding more than ``mass / (10 M)``."""
    return float(np.mean(m.weights > float(m.mass) / (10 * m.M)))


def fixed_point_fields(result: EquilibriumResult, k: int) -> Callable:
    """External field on ``E_k`` whose scalar equilibrium is ``mu_k`` normalized.

    ``-(p / (2 (p - k))) (U^{mu_{k-1}} + U^{mu_{k+1}})``; the matching
    constant is ``p w_k / (p - k)``.
    """
    p = result.p
    c = p / (2 * (p - k))
    return lambda x: -c * (result.potential(k - 1, x) + result.potential(k + 1, x))
