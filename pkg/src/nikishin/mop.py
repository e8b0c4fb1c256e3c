"""Multi-orthogonal polynomials ``Q_n`` through their reduced form.

``Q_n(z) = z^ell * Qd(z^(p+1))`` with ``n = d(p+1) + ell``.  Two independent
routes are provided:

* :func:`solve_Qd` assembles the ``d`` segment orthogonality conditions
  against ``mu_{0,j}`` and solves for ``Qd`` in a Chebyshev basis.
* :func:`mop_sequence` runs the order ``p+1`` recurrence, computing each
  coefficient ``a_n`` as a ratio of two segment integrals.  It is much cheaper
  for long runs and is cross-checked against the linear solver in the tests.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

from mpmath import mp

from .indices import IndexData, counting_range, orthogonality_ranges
from .measures import MuHierarchy, build_mu_hierarchy
from .polys import ChebSeries, MonicPoly, Poly, cheb_table, float_cheb_roots


class NormalityError(ArithmeticError):
    """The orthogonality system is numerically singular."""


class StructuralError(ArithmeticError):
    """A provable structural property failed numerically."""


@dataclass(frozen=True)
class QnRecord:
    """One multi-orthogonal polynomial and its zeros.

    ``cheb`` holds the reduced polynomial as a Chebyshev series on
    ``[a_0, b_0]`` and is what evaluations use.  Monomial coefficients and
    zeros are derived lazily.
    """

    n: int
    p: int
    ell: int
    d: int
    cheb: ChebSeries
    prec: int
    a_n: object = None
    pivot: object = None
    meta: dict = field(default_factory=dict, compare=False, repr=False)

    @cached_property
    def Qd(self) -> MonicPoly:
        with mp.workprec(self.prec):
            c = list(self.cheb.to_monomial().coeffs[: self.d + 1])
        c[-1] = mp.one
        return MonicPoly(tuple(c))

    @cached_property
    def segment_zeros(self) -> tuple:
        if self.d == 0:
            return ()
        with mp.workprec(self.prec):
            return tuple(_segment_roots(self.cheb, self.cheb.a, self.cheb.b, self.prec))

    @cached_property
    def star_zeros(self) -> tuple:
        return lift_to_star(self)

    def Qd_eval(self, tau):
        with mp.workprec(self.prec):
            return self.cheb(tau)

    def __call__(self, z):
        """``Q_n(z)``."""
        with mp.workprec(self.prec):
            return z**self.ell * self.cheb(z ** (self.p + 1))

    def Qn(self) -> MonicPoly:
        """Full monomial representation in ``z``; only degrees ``= ell mod (p+1)`` occur."""
        c = [mp.zero] * (self.n + 1)
        for i, v in enumerate(self.Qd.coeffs):
            c[self.ell + i * (self.p + 1)] = v
        c[-1] = 1
        return MonicPoly(tuple(c))


def _monic_cheb_lead(d: int, a, b):
    # Chebyshev coefficient of T_d for a monic polynomial of degree d on [a, b]
    if d == 0:
        return mp.one
    return ((b - a) / 2) ** d / mp.power(2, d - 1)


def _lu_solve(A: list, rhs: list) -> tuple[list, object]:
    """Gaussian elimination with partial pivoting on row-equilibrated data.

    Returns the solution and the smallest pivot magnitude, used as a
    normality proxy.
    """
    n = len(A)
    M = [list(r) + [v] for r, v in zip(A, rhs)]
    for r in M:
        s = max(abs(v) for v in r[:n]) if n else mp.one
        if s == 0:
            return None, mp.zero
        for i in range(n + 1):
            r[i] /= s
    proxy = mp.inf
    for c in range(n):
        piv = max(range(c, n), key=lambda i: abs(M[i][c]))
        M[c], M[piv] = M[piv], M[c]
        pv = M[c][c]
        proxy = min(proxy, abs(pv))
        if pv == 0:
            return None, mp.zero
        for i in range(c + 1, n):
            f = M[i][c] / pv
            if f:
                Mi, Mc = M[i], M[c]
                for k in range(c, n + 1):
                    Mi[k] -= f * Mc[k]
    x = [mp.zero] * n
    for i in range(n - 1, -1, -1):
        s = M[i][n] - mp.fsum(M[i][k] * x[k] for k in range(i + 1, n))
        x[i] = s / M[i][i]
    return x, proxy


def _orthogonality_residual(h: MuHierarchy, n: int, values: list) -> object:
    """Largest relative defect of the raw moment conditions ``int Qd tau^s dmu_{0,j}``."""
    p = h.p
    worst = mp.zero
    nodes = h.sigma[0].nodes
    for j, lo, hi in orthogonality_ranges(n, p, 0):
        if hi < lo:
            continue
        w = h.mu[(0, j)].weights
        terms = [wi * vi * x**lo for wi, vi, x in zip(w, values, nodes)]
        for s in range(lo, hi + 1):
            if s > lo:
                terms = [t * x for t, x in zip(terms, nodes)]
            big = max(abs(t) for t in terms)
            if big:
                worst = max(worst, abs(mp.fsum(terms)) / big)
    return worst


def _record_from_cheb(h: MuHierarchy, n: int, coeffs: list, pivot=None, a_n=None, check=True, values=None) -> QnRecord:
    p = h.p
    a, b = h.interval(0)
    ix = IndexData.of(n, p)
    lead = _monic_cheb_lead(ix.d, a, b)
    coeffs = [c * (lead / coeffs[-1]) for c in coeffs]
    coeffs[-1] = lead
    rec = QnRecord(n, p, ix.ell, ix.d, ChebSeries(tuple(coeffs), a, b), h.prec, a_n, pivot)
    if check and ix.d:
        vals = values if values is not None else [rec.cheb(x) for x in h.sigma[0].nodes]
        res = _orthogonality_residual(h, n, vals)
        tol = mp.mpf(10) ** (-(h.prec / 2 * 0.3))
        rec.meta["orthogonality_residual"] = res
        if res > tol:
            raise StructuralError(f"n={n}: orthogonality residual {mp.nstr(res, 5)} above {mp.nstr(tol, 3)}")
    return rec


def solve_Qd(h: MuHierarchy, n: int) -> QnRecord:
    """Compute ``Q_n`` from its ``d`` segment orthogonality conditions.

    Test functions ``tau^lo * T_i(x(tau))`` span the same space as the raw
    monomials ``tau^s``, ``lo <= s <= hi``, but keep the system well scaled.

    Raises
    ------
    NormalityError
        If the row-equilibrated system has a pivot below ``2**(-prec/2)``.
    """
    p = h.p
    ix = IndexData.of(n, p)
    d = ix.d
    with mp.workprec(h.prec):
        if d == 0:
            return _record_from_cheb(h, n, [mp.one], pivot=mp.one)
        a, b = h.interval(0)
        nodes = h.sigma[0].nodes
        xs = [(2 * t - a - b) / (b - a) for t in nodes]
        T = cheb_table(xs, d)
        rows = []
        for j, lo, hi in orthogonality_ranges(n, p, 0):
            w = h.mu[(0, j)].weights
            for i in range(hi - lo + 1):
                f = [wq * t**lo * T[i][q] for q, (wq, t) in enumerate(zip(w, nodes))]
                rows.append([mp.fsum(fq * tm for fq, tm in zip(f, T[m])) for m in range(d + 1)])
        if len(rows) != d:
            raise StructuralError(f"n={n}: {len(rows)} conditions for degree {d}")
        lead = _monic_cheb_lead(d, a, b)
        A = [r[:d] for r in rows]
        rhs = [-lead * r[d] for r in rows]
        sol, proxy = _lu_solve(A, rhs)
        if sol is None or proxy < mp.ldexp(1, -h.prec // 2):
            raise NormalityError(f"normality check failed at n={n} (pivot proxy {mp.nstr(proxy, 5)})")
        return _record_from_cheb(h, n, sol + [lead], pivot=proxy)


def solve_Qd_checked(h: MuHierarchy, n: int) -> QnRecord:
    """:func:`solve_Qd` with one retry at doubled precision."""
    try:
        return solve_Qd(h, n)
    except NormalityError:
        h2 = build_mu_hierarchy(h.system, h.order, 2 * h.prec)
        return solve_Qd(h2, n)


def _polish(cheb: ChebSeries, x, tol, found: list):
    for _ in range(100):
        f, df = cheb.with_derivative(x)
        if f == 0:
            return x
        # Newton-Maehly: implicit deflation of roots already found
        corr = mp.fsum(1 / (x - r) for r in found) if found else 0
        dx = f / (df - f * corr)
        x -= dx
        if abs(dx) <= tol:
            return x
    raise StructuralError("root polishing did not converge")


def _segment_roots(cheb: ChebSeries, a, b, prec: int) -> list:
    """Real simple roots of a Chebyshev series in ``(a, b)``, polished in extended precision.

    Double-precision colleague-matrix roots (real parts) seed Newton's
    method.  If two seeds converge to the same root, the whole set is redone
    with Maehly deflation.
    """
    d = cheb.degree
    h, c = (b - a) / 2, (a + b) / 2
    guesses = sorted(float(g.real) for g in float_cheb_roots(cheb.coeffs))
    tol = mp.ldexp(1, -prec + 8) * max(abs(a), abs(b))
    roots = sorted(_polish(cheb, h * mp.mpf(g) + c, tol, []) for g in guesses)
    if any(not roots[i] - roots[i - 1] > 64 * tol for i in range(1, d)):
        found: list = []
        for g in guesses:
            found.append(_polish(cheb, h * mp.mpf(g) + c, tol, found))
        roots = sorted(found)
    if len(roots) != d:
        raise StructuralError("wrong number of roots")
    for i, x in enumerate(roots):
        if not a < x < b:
            raise StructuralError(f"root {mp.nstr(x, 10)} outside ({a}, {b})")
        if i and not roots[i] > roots[i - 1]:
            raise StructuralError("repeated root")
    # simplicity: an actual sign change across each root
    for i, x in enumerate(roots):
        gaps = [roots[i + 1] - x] if i + 1 < d else []
        gaps += [x - roots[i - 1]] if i else []
        gaps += [x - a, b - x]
        delta = min(gaps) * mp.mpf("1e-6")
        if cheb(x - delta) * cheb(x + delta) >= 0:
            raise StructuralError(f"no sign change at root {mp.nstr(x, 10)}")
    return roots


def zeros_segment(rec: QnRecord) -> tuple:
    return rec.segment_zeros


def lift_to_star(rec: QnRecord) -> tuple:
    """All ``n`` zeros of ``Q_n``: ``ell`` at the origin, then ``p+1`` roots per segment zero."""
    e = rec.p + 1
    with mp.workprec(rec.prec):
        out = [mp.mpc(0)] * rec.ell
        for t in rec.segment_zeros:
            r = abs(t) ** (mp.one / e)
            base = 0 if t > 0 else mp.pi
            for m in range(e):
                out.append(r * mp.expj((base + 2 * mp.pi * m) / e))
    return tuple(out)


@dataclass(frozen=True)
class NormalityRow:
    n: int
    d: int
    pivot: object
    normal: bool


def check_normality(h: MuHierarchy, n_max: int) -> list[NormalityRow]:
    """Solve every ``n <= n_max`` and report the pivot proxy.

    A failure that persists after the precision retry is reported as
    ``normal = False`` rather than raised.
    """
    rows = []
    for n in range(n_max + 1):
        d = IndexData.of(n, h.p).d
        try:
            rec = solve_Qd_checked(h, n)
            ok = rec.Qn().degree == n
            rows.append(NormalityRow(n, d, rec.pivot, ok))
        except NormalityError:
            rows.append(NormalityRow(n, d, mp.zero, False))
    return rows


def mop_sequence(h: MuHierarchy, n_max: int, check: bool = True) -> list[QnRecord]:
    """``Q_0, ..., Q_{n_max}`` by the recurrence, with ``a_n`` for ``n >= p``.

    With ``n = m*p + r``, ``a_n`` is the ratio
    ``int Q_n t^m ds_r / int Q_{n-p} t^(m-1) ds_r``; both integrals reduce to
    segment integrals of ``Qd`` against ``tau^e dmu_{0,r}``.  Since ``Qd`` is
    orthogonal to lower powers, ``tau^e`` is replaced by
    ``tau^lo * T~_{e-lo}(tau)`` (monic Chebyshev), which avoids cancellation.
    """
    p = h.p
    with mp.workprec(h.prec):
        a, b = h.interval(0)
        nodes = h.sigma[0].nodes
        xs = [(2 * t - a - b) / (b - a) for t in nodes]
        tilde: list[list] = []

        def monic_cheb(m: int) -> list:
            while len(tilde) <= m:
                k = len(tilde)
                if k == 0:
                    tilde.append([mp.one] * len(xs))
                elif k == 1:
                    tilde.append([t - (a + b) / 2 for t in nodes])
                else:
                    hh = ((b - a) / 2) ** 2
                    f = hh / 2 if k == 2 else hh / 4
                    tilde.append([(t - (a + b) / 2) * u - f * v for t, u, v in zip(nodes, tilde[-1], tilde[-2])])
            return tilde[m]

        def reduced_integral(k: int, r: int, m: int, vals: list):
            ell = k % (p + 1)
            num = ell + m - r
            if num % (p + 1):
                raise StructuralError(f"n={k}: moment exponent is not integral")
            e = num // (p + 1)
            lo, hi = counting_range(k, r, p)
            if e != hi + 1 or e < lo:
                raise StructuralError(f"n={k}: unexpected moment exponent {e} (range {lo}..{hi})")
            w = h.mu[(0, r)].weights
            tt = monic_cheb(e - lo)
            return mp.fsum(wi * vi * t**lo * ti for wi, vi, t, ti in zip(w, vals, nodes, tt))

        chebs = [ChebSeries((mp.one,), a, b) for _ in range(p + 1)]
        values = [[mp.one] * len(nodes) for _ in range(p + 1)]
        an: dict[int, object] = {}
        for n in range(p, n_max):
            r, m = n % p, n // p
            num = reduced_integral(n, r, m, values[n])
            den = reduced_integral(n - p, r, m - 1, values[n - p])
            an[n] = num / den
            ell = n % (p + 1)
            if ell < p:
                new_c = chebs[n].combine(chebs[n - p], an[n])
                new_v = [u - an[n] * v for u, v in zip(values[n], values[n - p])]
            else:
                new_c = chebs[n].times_t().combine(chebs[n - p], an[n])
                new_v = [t * u - an[n] * v for t, u, v in zip(nodes, values[n], values[n - p])]
            chebs.append(new_c)
            values.append(new_v)
        recs = []
        for n in range(n_max + 1):
            rec = _record_from_cheb(h, n, list(chebs[n].coeffs), a_n=an.get(n), check=check, values=values[n])
            rec.meta["node_values"] = values[n]
            recs.append(rec)
        return recs
