"""Gauss rules in extended precision.

Nodes start from double-precision eigenvalues of the Jacobi matrix and are
polished by Newton's method on the three-term recurrence, so the cost is
``O(order**2)`` fixed-point operations rather than a full multiprecision
eigenproblem.
"""

from __future__ import annotations

import numpy as np
from mpmath import mp
from scipy.linalg import eigh_tridiagonal


def jacobi_recurrence(order: int, alpha, beta) -> tuple[list, list]:
    """Monic recurrence coefficients for ``(1-x)^alpha (1+x)^beta`` on ``[-1, 1]``.

    Returns ``(a, b)`` with ``p_{k+1} = (x - a_k) p_k - b_k p_{k-1}`` and
    ``b_0`` the total mass.  Must be called inside the desired working
    precision.
    """
    al, be = mp.mpf(alpha), mp.mpf(beta)
    if al <= -1 or be <= -1:
        raise ValueError("Jacobi exponents must exceed -1")
    s = al + be
    a, b = [], []
    for k in range(order):
        t = 2 * k + s
        if k == 0:
            a.append((be - al) / (s + 2))
            b.append(mp.power(2, s + 1) * mp.gamma(al + 1) * mp.gamma(be + 1) / mp.gamma(s + 2))
        else:
            a.append((be * be - al * al) / (t * (t + 2)) if be != al else mp.zero)
            if k == 1:
                b.append(4 * (al + 1) * (be + 1) / ((s + 2) ** 2 * (s + 3)))
            else:
                b.append(4 * k * (k + al) * (k + be) * (k + s) / (t * t * (t + 1) * (t - 1)))
    return a, b


def _to_fix(v, scale, bits: int) -> int:
    return int(mp.nint(mp.ldexp(v / scale, bits)))


def _from_fix(v: int, scale, bits: int):
    return mp.ldexp(mp.mpf(v), -bits) * scale


def stieltjes(x: list, w: list, order: int) -> tuple[list, list]:
    """Monic recurrence coefficients of the discrete measure ``sum w_i delta_{x_i}``.

    Discretized Stieltjes procedure on orthonormal vectors.  The inner
    products run in scaled fixed-point integer arithmetic with 48 guard bits,
    which is much faster than mpf arithmetic and loses nothing here because
    every quantity is bounded relative to the interval scale.
    """
    n = len(x)
    if order > n:
        raise ValueError("order exceeds the number of support points")
    P = mp.prec + 48
    one = 1 << P
    L = max(abs(t) for t in x)
    mass = mp.fsum(w)
    X = [_to_fix(t, L, P) for t in x]
    W = [_to_fix(t, mass, P) for t in w]
    prev = [0] * n
    cur = [one] * n
    a, b = [], [mass]
    beta_prev = 0
    for k in range(order):
        sq = [(wi * ci >> P) * ci >> P for wi, ci in zip(W, cur)]
        ak = sum(s_ * xi for s_, xi in zip(sq, X)) >> P
        a.append(_from_fix(ak, L, P))
        if k + 1 == order:
            break
        nxt = [((xi - ak) * ci - beta_prev * pi) >> P for xi, ci, pi in zip(X, cur, prev)]
        nrm2 = sum((wi * vi >> P) * vi for wi, vi in zip(W, nxt)) >> P
        bk2 = _from_fix(nrm2, 1, P)
        bk = mp.sqrt(bk2)
        b.append(bk2 * L * L)
        inv = _to_fix(1 / bk, 1, P)
        beta_prev = _to_fix(bk, 1, P)
        prev, cur = cur, [vi * inv >> P for vi in nxt]
    return a, b


def gauss_from_recurrence(a: list, b: list) -> tuple[list, list]:
    """Gauss nodes and weights from monic recurrence coefficients.

    ``len(a) == len(b) == order``; ``b[0]`` is the total mass.  Double
    precision eigenvalues of the Jacobi matrix seed a Newton iteration on the
    orthonormal recurrence, carried out in fixed-point integer arithmetic at
    the working precision plus guard bits.
    """
    order = len(a)
    fa = np.array([float(v) for v in a])
    fb = np.sqrt(np.array([float(v) for v in b[1:order]]))
    if order == 1:
        guesses = fa.copy()
    else:
        guesses = eigh_tridiagonal(fa, fb, eigvals_only=True)
    sb = [mp.sqrt(v) for v in b]
    L = max(abs(v) for v in a) + max(sb[1:], default=mp.one) + abs(mp.mpf(float(np.max(np.abs(guesses)))))
    P = mp.prec + 48
    one = 1 << P
    A = [_to_fix(v, L, P) for v in a]
    SB = [_to_fix(v, L, P) for v in sb]
    INV = [0] + [_to_fix(L / v, 1, P) for v in sb[1:]] + [one]
    tol = 1 << 56
    nodes, weights = [], []
    for g in guesses:
        xf = _to_fix(mp.mpf(g), L, P)
        for _ in range(60):
            p0, p1, d0, d1 = 0, one, 0, 0
            for k in range(order):
                t = xf - A[k]
                inv = INV[k + 1]
                if k:
                    p2 = ((t * p1 - SB[k] * p0) >> P) * inv >> P
                    d2 = ((p1 << P) + t * d1 - SB[k] * d0 >> P) * inv >> P
                else:
                    p2 = (t * p1 >> P) * inv >> P
                    d2 = (p1 + (t * d1 >> P)) * inv >> P
                p0, p1, d0, d1 = p1, p2, d1, d2
            if d1 == 0:
                raise ArithmeticError("zero derivative while polishing a Gauss node")
            dx = (p1 << P) // d1
            xf -= dx
            if abs(dx) <= tol:
                break
        else:
            raise ArithmeticError("Newton polish of a Gauss node did not converge")
        s = 0
        p0, p1 = 0, one
        for k in range(order):
            s += p1 * p1 >> P
            if k + 1 < order:
                t = xf - A[k]
                p2 = ((t * p1 - (SB[k] * p0 if k else 0)) >> P) * INV[k + 1] >> P
                p0, p1 = p1, p2
        nodes.append(_from_fix(xf, L, P))
        weights.append(b[0] / _from_fix(s, 1, P))
    for i in range(1, order):
        if not nodes[i] > nodes[i - 1]:
            raise ArithmeticError("Gauss nodes collided after polishing")
    return nodes, weights


def gauss_jacobi(order: int, alpha, beta, a, b) -> tuple[list, list]:
    """Gauss rule for ``(tau-a)^alpha (b-tau)^beta dtau`` on ``[a, b]``."""
    a, b = mp.mpf(a), mp.mpf(b)
    # standard form carries (1-x)^beta (1+x)^alpha
    ra, rb = jacobi_recurrence(order, beta, alpha)
    x, w = gauss_from_recurrence(ra, rb)
    h = (b - a) / 2
    c = (a + b) / 2
    scale = mp.power(h, mp.mpf(alpha) + mp.mpf(beta) + 1)
    return [h * t + c for t in x], [scale * v for v in w]


def gauss_legendre(order: int, a, b) -> tuple[list, list]:
    return gauss_jacobi(order, 0, 0, a, b)


def fejer(npts: int, a, b) -> tuple[list, list]:
    """Fejer's first rule on ``[a, b]``: interior Chebyshev nodes, exact to degree ``npts-1``."""
    a, b = mp.mpf(a), mp.mpf(b)
    M = npts
    # cos(m pi / (2M)) for every residue m mod 4M
    cos_tab = [mp.cospi(mp.mpf(m) / (2 * M)) for m in range(4 * M)]
    h, c = (b - a) / 2, (a + b) / 2
    x, w = [], []
    for k in range(M - 1, -1, -1):
        s = mp.fsum(cos_tab[(2 * j * (2 * k + 1)) % (4 * M)] / (4 * j * j - 1) for j in range(1, M // 2 + 1))
        x.append(c + h * cos_tab[2 * k + 1])
        w.append(h * 2 * (1 - 2 * s) / M)
    return x, w


def gauss_from_discrete(x: list, w: list, order: int) -> tuple[list, list]:
    """Gauss rule of a positive discrete measure via the Stieltjes procedure."""
    keep = [(xi, wi) for xi, wi in zip(x, w) if wi > 0]
    if len(keep) < order:
        raise ValueError("density has too few support points for the requested order")
    xs, ws = [k[0] for k in keep], [k[1] for k in keep]
    ra, rb = stieltjes(xs, ws, order)
    return gauss_from_recurrence(ra, rb)
