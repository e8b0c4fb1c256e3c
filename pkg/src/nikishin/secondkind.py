"""Functions of the second kind, their zero polynomials and normalization.

For a record ``Q_n`` the functions ``psi_{n,k}`` (``0 <= k <= p``) are built
level by level from their values at the quadrature nodes of ``sigma*_k``:

    psi_{n,0} = Qd,
    psi_{n,k}(z) = z^[ell<k] * sum_i W_i psi_{n,k-1}(x_i) / (z - x_i),

where ``(x_i, W_i)`` is the rule of ``sigma_{n,k-1}`` (``tau * sigma*_{k-1}``
when ``k-1 < ell``).  ``psi_{n,k}`` is analytic off ``[a_{k-1}, b_{k-1}]``,
which is disjoint from ``[a_k, b_k]``, so it is evaluated directly on the real
axis there.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from mpmath import mp

from .indices import Z, decay_order, lemma_exponent, orthogonality_ranges
from .measures import MuHierarchy, PoleProximityError, POLE_GUARD
from .mop import QnRecord, StructuralError
from .polys import MonicPoly


def _sign(x) -> int:
    return 1 if x > 0 else -1 if x < 0 else 0


def _illinois(f, lo, hi, flo, fhi, tol, maxit: int = 400):
    """Bracketed root refinement (regula falsi with the Illinois modification)."""
    side = 0
    for _ in range(maxit):
        x = (lo * fhi - hi * flo) / (fhi - flo)
        if not lo < x < hi:
            x = (lo + hi) / 2
        fx = f(x)
        if fx == 0:
            return x
        if _sign(fx) == _sign(flo):
            lo, flo = x, fx
            if side == -1:
                fhi /= 2
            side = -1
        else:
            hi, fhi = x, fx
            if side == 1:
                flo /= 2
            side = 1
        if hi - lo <= tol:
            return (lo + hi) / 2
    raise StructuralError("bracketed root refinement did not converge")


@dataclass(frozen=True)
class SecondKindBundle:
    """Per ``(n, k)``: zero polynomial, normalization constants and evaluators."""

    n: int
    k: int
    Pnk: MonicPoly
    roots: tuple
    Knk: object
    kappa: object
    eps: int
    psi: object
    hnk: object


class SecondKind:
    """All second-kind data attached to one record ``Q_n``."""

    def __init__(self, h: MuHierarchy, rec: QnRecord):
        if rec.p != h.p:
            raise ValueError("record and hierarchy disagree on p")
        self.h = h
        self.rec = rec
        self.n, self.p, self.ell = rec.n, rec.p, rec.ell
        self.prec = h.prec

    # -- node data ---------------------------------------------------------
    def level_weights(self, k: int) -> list:
        """Weights of ``sigma_{n,k}`` on the nodes of ``sigma*_k``."""
        s = self.h.sigma[k]
        if k < self.ell:
            return [w * x for x, w in zip(s.nodes, s.weights)]
        return list(s.weights)

    @cached_property
    def node_values(self) -> list:
        """``psi_{n,k}`` at the nodes of ``sigma*_k`` for ``k = 0..p-1``."""
        with mp.workprec(self.prec):
            vals = [[self.rec.cheb(x) for x in self.h.sigma[0].nodes]]
            for k in range(1, self.p):
                vals.append([self._psi_from_level(k, x, vals[k - 1]) for x in self.h.sigma[k].nodes])
            return vals

    def _psi_from_level(self, k: int, z, prev_vals):
        s = self.h.sigma[k - 1]
        W = self._lw[k - 1]
        total = mp.fsum(w * v / (z - x) for x, w, v in zip(s.nodes, W, prev_vals))
        return z * total if self.ell < k else total

    @cached_property
    def _lw(self) -> list:
        with mp.workprec(self.prec):
            return [self.level_weights(k) for k in range(self.p)]

    # -- evaluation --------------------------------------------------------
    def psi(self, k: int, z):
        """``psi_{n,k}(z)`` for ``0 <= k <= p``."""
        with mp.workprec(self.prec):
            if k == 0:
                return self.rec.cheb(z)
            a, b = self.h.interval(k - 1)
            guard = POLE_GUARD * (b - a)
            s = self.h.sigma[k - 1]
            if abs(mp.im(z)) < guard and a - guard < mp.re(z) < b + guard:
                if min(abs(z - x) for x in s.nodes) < guard:
                    raise PoleProximityError(f"psi_{{n,{k}}} evaluated on its cut at {mp.nstr(z, 8)}")
            return self._psi_from_level(k, z, self.node_values[k - 1])

    def Psi(self, k: int, z):
        """``Psi_{n,k}(z) = z^(ell-k) psi_{n,k}(z^(p+1))`` on the star."""
        with mp.workprec(self.prec):
            z = mp.mpmathify(z)
            return z ** (self.ell - k) * self.psi(k, z ** (self.p + 1))

    def float_evaluator(self, k: int):
        """Double-precision evaluator of ``psi_{n,k}`` plus an error scale.

        Returns ``f(z) -> (value, scale)`` on numpy complex arrays, where
        ``scale`` bounds the magnitude of the summed terms.
        """
        if k == 0:
            c = np.array([float(v) for v in self.rec.cheb.coeffs])
            a, b = float(self.rec.cheb.a), float(self.rec.cheb.b)

            def f0(z):
                x = (2 * z - a - b) / (b - a)
                val = np.polynomial.chebyshev.chebval(x, c)
                rho = np.abs(x) + np.abs(np.sqrt(x * x - 1 + 0j))
                scale = np.sum(np.abs(c)) * np.maximum(rho, 1.0) ** (len(c) - 1)
                return val, scale

            return f0
        s = self.h.sigma[k - 1]
        x = np.array([float(t) for t in s.nodes])
        with mp.workprec(self.prec):
            c = np.array([float(w * v) for w, v in zip(self._lw[k - 1], self.node_values[k - 1])])
        zfac = self.ell < k

        def fk(z):
            z = np.asarray(z, dtype=complex)
            terms = c[None, :] / (z.reshape(-1, 1) - x[None, :])
            val = terms.sum(axis=1)
            scale = np.abs(terms).sum(axis=1)
            if zfac:
                val = val * z.reshape(-1)
                scale = scale * np.abs(z.reshape(-1))
            return val.reshape(z.shape), scale.reshape(z.shape)

        return fk

    # -- zeros ---------------------------------------------------------------
    def zeros(self, k: int) -> tuple:
        """Zeros of ``psi_{n,k}`` in ``(a_k, b_k)``, i.e. of ``P_{n,k}`` (``0 <= k <= p-1``)."""
        return self._zeros[k]

    @cached_property
    def _zeros(self) -> list:
        out = [tuple(self.rec.segment_zeros)]
        for k in range(1, self.p):
            out.append(tuple(self._scan_zeros(k)))
        return out

    def _scan_zeros(self, k: int) -> list:
        expected = Z(self.n, k, self.p)
        a, b = self.h.interval(k)
        with mp.workprec(self.prec):
            f = lambda t: self._psi_from_level(k, t, self.node_values[k - 1])  # noqa: E731
            tol = mp.ldexp(1, -self.prec + 10) * max(abs(a), abs(b))
            G = max(64, 8 * expected + 32)
            for _ in range(5):
                # Chebyshev points of the first kind: interior, denser at the ends
                ts = [(a + b) / 2 - (b - a) / 2 * mp.cospi(mp.mpf(2 * i + 1) / (2 * G)) for i in range(G)]
                fs = [f(t) for t in ts]
                brackets = [i for i in range(G - 1) if _sign(fs[i]) * _sign(fs[i + 1]) < 0 or fs[i] == 0]
                if len(brackets) >= expected:
                    break
                G *= 2
            if len(brackets) != expected:
                raise StructuralError(
                    f"psi_{{{self.n},{k}}}: found {len(brackets)} sign changes on ({a}, {b}), expected {expected}"
                )
            roots = []
            for i in brackets:
                if fs[i] == 0:
                    roots.append(ts[i])
                else:
                    roots.append(_illinois(f, ts[i], ts[i + 1], fs[i], fs[i + 1], tol))
            return roots

    def P(self, k: int) -> MonicPoly:
        """``P_{n,k}``; ``P_{n,-1} = P_{n,p} = 1``."""
        if k < 0 or k >= self.p:
            return MonicPoly((1,))
        with mp.workprec(self.prec):
            return MonicPoly.from_roots(self.zeros(k))

    def P_eval(self, k: int, t):
        if k < 0 or k >= self.p:
            return mp.one
        with mp.workprec(self.prec):
            out = mp.one
            for r in self.zeros(k):
                out *= t - r
            return out

    def H(self, k: int, z):
        """``H_{n,k} = P_{n,k-1} psi_{n,k} / P_{n,k}``."""
        with mp.workprec(self.prec):
            return self.P_eval(k - 1, z) * self.psi(k, z) / self.P_eval(k, z)

    # -- normalization ---------------------------------------------------------
    @cached_property
    def _norm(self) -> dict:
        p = self.p
        with mp.workprec(self.prec):
            K = {-1: mp.one, p: mp.one}
            eps, sH, sPP = {}, {}, {}
            for k in range(p):
                s = self.h.sigma[k]
                W = self._lw[k]
                vals = self.node_values[k]
                dens = []
                for x, w, v in zip(s.nodes, W, vals):
                    Pk = self.P_eval(k, x)
                    Pm, Pp = self.P_eval(k - 1, x), self.P_eval(k + 1, x)
                    Hk = Pm * v / Pk
                    dens.append((Pk, Hk, w, Pm * Pp))
                signs_H = {_sign(d[1]) for d in dens}
                signs_PP = {_sign(d[3]) for d in dens}
                signs_nu = {_sign(d[1] * d[2] / d[3]) for d in dens}
                if len(signs_H) != 1 or len(signs_PP) != 1 or len(signs_nu) != 1:
                    raise StructuralError(f"n={self.n}, k={k}: sign of H or of the varying measure is not constant")
                sH[k], sPP[k], eps[k] = signs_H.pop(), signs_PP.pop(), signs_nu.pop()
                integral = mp.fsum(Pk * Pk * abs(Hk) * abs(w) / abs(PP) for Pk, Hk, w, PP in dens)
                K[k] = 1 / mp.sqrt(integral)
            kappa = {k: K[k] / K[k - 1] for k in range(p + 1)}
            return {"K": K, "kappa": kappa, "eps": eps, "sign_H": sH, "sign_PP": sPP}

    def K(self, k: int):
        return self._norm["K"][k]

    def kappa(self, k: int):
        return self._norm["kappa"][k]

    def eps(self, k: int) -> int:
        return self._norm["eps"][k]

    def sign_H(self, k: int) -> int:
        return self._norm["sign_H"][k]

    def sign_PP(self, k: int) -> int:
        """Sign of ``P_{n,k-1} P_{n,k+1}`` on ``(a_k, b_k)``."""
        return self._norm["sign_PP"][k]

    def h_eval(self, k: int, z):
        """``h_{n,k} = K_{n,k-1}^2 H_{n,k}``."""
        with mp.workprec(self.prec):
            return self.K(k - 1) ** 2 * self.H(k, z)

    def orthonormality(self, k: int):
        """``int p_{n,k}^2 d|nu_{n,k}|`` assembled from its factors (should be 1)."""
        with mp.workprec(self.prec):
            s = self.h.sigma[k]
            kap, K2 = self.kappa(k), self.K(k - 1) ** 2
            terms = []
            for x, w, v in zip(s.nodes, self._lw[k], self.node_values[k]):
                pk = kap * self.P_eval(k, x)
                hk = K2 * self.P_eval(k - 1, x) * v / self.P_eval(k, x)
                terms.append(pk * pk * abs(hk) * abs(w) / abs(self.P_eval(k - 1, x) * self.P_eval(k + 1, x)))
            return mp.fsum(terms)

    def bundle(self, k: int) -> SecondKindBundle:
        psi = lambda z, _k=k: self.psi(_k, z)  # noqa: E731
        hnk = lambda z, _k=k: self.h_eval(_k, z)  # noqa: E731
        if k == self.p:
            return SecondKindBundle(self.n, k, MonicPoly((1,)), (), mp.one, self.kappa(k), 1, psi, hnk)
        return SecondKindBundle(
            self.n, k, self.P(k), self.zeros(k), self.K(k), self.kappa(k), self.eps(k), psi, hnk
        )

    def bundles(self) -> list[SecondKindBundle]:
        return [self.bundle(k) for k in range(self.p + 1)]

    # -- audits -------------------------------------------------------------
    def orthogonality_defects(self, k: int) -> dict:
        """Relative defects of the orthogonality relations satisfied by ``psi_{n,k}``.

        ``varying``: ``int psi tau^s dsigma_{n,k} / P_{n,k+1}``, ``s < Z(n,k)``.
        ``plain``: ``int psi tau^s dsigma_{n,k}``, ``s < Z(n,k) - Z(n,k+1)``.
        ``hierarchy``: ``int psi tau^s dmu_{k,j}`` over the counting ranges.
        Each value is ``|sum| / max|term|``, maximized over the conditions.
        """
        n, p = self.n, self.p
        with mp.workprec(self.prec):
            s = self.h.sigma[k]
            vals = self.node_values[k]
            W = self._lw[k]
            nodes = s.nodes

            def worst(weights, count, start=0):
                out = mp.zero
                if count <= 0:
                    return out
                terms = [w * v * x**start for w, v, x in zip(weights, vals, nodes)]
                for i in range(count):
                    if i:
                        terms = [t * x for t, x in zip(terms, nodes)]
                    big = max(abs(t) for t in terms)
                    if big:
                        out = max(out, abs(mp.fsum(terms)) / big)
                return out

            Wv = [w / self.P_eval(k + 1, x) for x, w in zip(nodes, W)]
            res = {
                "varying": worst(Wv, Z(n, k, p)),
                "plain": worst(W, Z(n, k, p) - Z(n, k + 1, p)),
            }
            hier = mp.zero
            for j, lo, hi in orthogonality_ranges(n, p, k):
                hier = max(hier, worst(self.h.mu[(k, j)].weights, hi - lo + 1, lo))
            res["hierarchy"] = hier
            return res

    def decay_slope(self, k: int, radii=None, theta=0.3) -> tuple[float, int]:
        """Least-squares slope of ``log|psi_{n,k}(R e^{i theta})|`` against ``log R``.

        Returns the fitted slope and the predicted order ``-N(n,k)``.
        """
        if radii is None:
            radii = [10 ** (3 + 0.5 * i) for i in range(7)]
        with mp.workprec(self.prec):
            xs, ys = [], []
            for R in radii:
                z = mp.mpf(R) * mp.expj(theta)
                xs.append(float(mp.log(R)))
                ys.append(float(mp.log(abs(self.psi(k, z)))))
        slope = np.polyfit(xs, ys, 1)[0]
        return float(slope), -decay_order(self.n, k, self.p)


def sign_PP_formula(n: int, p: int) -> int:
    """Predicted sign of ``P_{n,k-1} P_{n,k+1}`` on ``(a_k, b_k)`` for ``k = n mod p``."""
    k, ell = n % p, n % (p + 1)
    if k % 2 == 0:
        return 1
    return 1 if k == ell else -1


def sign_H_formula(n: int, j: int, p: int) -> int:
    """Predicted sign of ``H_{n,j}`` on ``(a_j, b_j)``; stated for ``0 <= j <= n mod p``."""
    ell = n % (p + 1)
    return (-1) ** j if j <= ell else 1


def sign_H_step(n: int, k: int, p: int) -> int:
    """Predicted ratio ``sign(H_{n,k}) / sign(H_{n,k-1})`` for ``1 <= k <= p-1``.

    Uses the convention ``Z(n,-1) = 0``.
    """
    ell = n % (p + 1)
    zm2 = Z(n, k - 2, p) if k >= 2 else 0
    e = (k + 1) * (zm2 - Z(n, k, p))
    return (-1) ** (e + (1 if k <= ell else 0))


def recurrence_residual(sk_nmp: SecondKind, sk_n: SecondKind, sk_np1: SecondKind, a_n, k: int, probes) -> object:
    """Max relative defect of the second-kind recurrence at the probe points.

    ``psi_{n,k} = psi_{n+1,k} + a_n psi_{n-p,k}`` if ``ell < p``, and
    ``z psi_{n,k} = psi_{n+1,k} + a_n psi_{n-p,k}`` if ``ell = p``.
    """
    worst = mp.zero
    with mp.workprec(sk_n.prec):
        for z in probes:
            lhs = sk_n.psi(k, z)
            if sk_n.ell == sk_n.p:
                lhs *= z
            r1, r2 = sk_np1.psi(k, z), a_n * sk_nmp.psi(k, z)
            scale = max(abs(lhs), abs(r1), abs(r2))
            worst = max(worst, abs(lhs - r1 - r2) / scale)
    return worst


def shift_lemma_defect(sk_n: SecondKind, sk_np1: SecondKind) -> object:
    """``int psi_{n+1,k} tau^e dsigma_{n,k}`` relative to its largest term, ``k = n mod p``."""
    n, p = sk_n.n, sk_n.p
    k, _, e_star = lemma_exponent(n, p)
    with mp.workprec(sk_n.prec):
        s = sk_n.h.sigma[k]
        if k == 0:
            vals = [sk_np1.rec.cheb(x) for x in s.nodes]
        else:
            vals = sk_np1.node_values[k]
        terms = [w * v * x**e_star for x, w, v in zip(s.nodes, s.weights, vals)]
        return abs(mp.fsum(terms)) / max(abs(t) for t in terms)


# -- argument principle -------------------------------------------------------


def _winding(f_float, f_mp, path, max_depth: int = 18) -> float:
    """Winding number of ``f`` around 0 along a closed polyline.

    Each edge is sampled adaptively until consecutive argument increments
    stay below 0.5 rad.  Values whose double-precision evaluation is not
    trustworthy (magnitude below ``1e-11`` of the summed-term scale, so the
    relative error could exceed about one percent) are recomputed with
    ``f_mp``.
    """

    def evaluate(zs):
        v, sc = f_float(zs)
        bad = ~(np.abs(v) > 1e-11 * sc)
        if np.any(bad):
            for i in np.nonzero(bad)[0]:
                val = f_mp(mp.mpc(complex(zs[i])))
                if val == 0:
                    raise StructuralError("zero of psi on the audit contour")
                v[i] = complex(val / abs(val))
        return v

    total = 0.0
    verts = list(path) + [path[0]]
    for z0, z1 in zip(verts[:-1], verts[1:]):
        ts = np.linspace(0.0, 1.0, 33)
        zs = z0 + (z1 - z0) * ts
        vs = evaluate(zs)
        stack = [(ts[i], ts[i + 1], vs[i], vs[i + 1], 0) for i in range(len(ts) - 1)]
        while stack:
            t0, t1, v0, v1, depth = stack.pop()
            d = np.angle(v1 / v0)
            if abs(d) > 0.5 and depth < max_depth:
                tm = (t0 + t1) / 2
                vm = evaluate(np.array([z0 + (z1 - z0) * tm]))[0]
                stack.append((t0, tm, v0, vm, depth + 1))
                stack.append((tm, t1, vm, v1, depth + 1))
            else:
                total += d
    w = total / (2 * np.pi)
    if abs(w - round(w)) > 0.05:
        raise StructuralError(f"winding number {w} is not close to an integer")
    return w


def _rect(x0, x1, y):
    return [complex(x0, -y), complex(x1, -y), complex(x1, y), complex(x0, y)]


def _circle(c, r, m: int = 64):
    return [c + r * np.exp(2j * np.pi * i / m) for i in range(m)]


def _dist(i1, i2) -> float:
    (a1, b1), (a2, b2) = i1, i2
    return max(a2 - b1, a1 - b2, 0.0)


@dataclass(frozen=True)
class ZeroAudit:
    k: int
    expected: int
    scanned: int
    rectangle: int | None
    global_count: int


def zero_count_audit(sk: SecondKind, k: int) -> ZeroAudit:
    """Count zeros of ``psi_{n,k}`` by the argument principle.

    ``rectangle``: zeros inside a thin rectangle around ``[a_k, b_k]`` (the
    origin excluded), ``None`` for ``k = p``.
    ``global_count``: zeros in the plane minus the cut ``[a_{k-1}, b_{k-1}]``
    and the origin, from a large circle minus small loops.
    """
    h = sk.h
    p = sk.p
    ivs = [tuple(float(v) for v in h.interval(j)) for j in range(p)]
    f_float = sk.float_evaluator(k)
    f_mp = lambda z: sk.psi(k, z)  # noqa: E731
    R = 2 * max(max(abs(a), abs(b)) for a, b in ivs) + 1
    eta = 1e-6 * min(b - a for a, b in ivs)
    rect_count = None
    if k < p:
        a, b = ivs[k]
        gaps = [0.25 * (b - a)]
        if k >= 1:
            gaps.append(0.25 * _dist(ivs[k], ivs[k - 1]))
        if not (a <= 0 <= b):
            gaps.append(0.25 * min(abs(a), abs(b)))
        delta = min(gaps)
        x0 = eta if a == 0 else a - delta
        x1 = -eta if b == 0 else b + delta
        rect_count = int(round(_winding(f_float, f_mp, _rect(x0, x1, delta))))
    big = _winding(f_float, f_mp, _circle(0.0, R, 256))
    inner = 0.0
    origin_in_cut = False
    if k >= 1:
        a, b = ivs[k - 1]
        origin_in_cut = a <= 0 <= b
        gaps = [0.25 * (b - a)]
        if k < p:
            gaps.append(0.25 * _dist(ivs[k - 1], ivs[k]))
        if not origin_in_cut:
            gaps.append(0.25 * min(abs(a), abs(b)))
        delta = min(gaps)
        inner += _winding(f_float, f_mp, _rect(a - delta, b + delta, delta))
    if not origin_in_cut:
        # small loop around the origin, which is excluded from the count
        if k < p and ivs[k][0] <= 0 <= ivs[k][1]:
            r0 = eta
        else:
            near = [min(abs(a), abs(b)) for a, b in ivs[max(k - 1, 0): k + 1]]
            r0 = 0.25 * min(near)
        inner += _winding(f_float, f_mp, _circle(0.0, r0, 32))
    glob = int(round(big - inner))
    scanned = len(sk.zeros(k)) if k < p else 0
    return ZeroAudit(k, Z(sk.n, k, p), scanned, rect_count, glob)
