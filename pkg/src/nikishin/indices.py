"""Integer bookkeeping for the diagonal multi-orthogonal polynomials.

Everything here is exact integer arithmetic.  Python's ``//`` floors toward
minus infinity, which is what the counting inequalities need when the
numerators are negative.
"""

from __future__ import annotations

from dataclasses import dataclass


def _ceil_div(a: int, b: int) -> int:
    return -((-a) // b)


def _check(n: int, p: int) -> None:
    if p < 1:
        raise ValueError(f"p must be positive, got {p}")
    if n < 0:
        raise ValueError(f"n must be nonnegative, got {n}")


@dataclass(frozen=True)
class IndexData:
    """Quotient/remainder data attached to a degree ``n``.

    Attributes
    ----------
    n, p : int
    ell : int
        ``n mod (p+1)``, the multiplicity of the zero of ``Q_n`` at the origin.
    r : int
        ``n mod p``.
    alpha, beta, v : int
        ``n + p*ell - 1 = alpha*p*(p+1) + beta`` and ``v = beta // (p+1)``.
    lam : int
        ``n // (p*(p+1))``.
    q : int
        ``n = lam*p*(p+1) + p*q + r``.
    d : int
        Degree of the reduced polynomial, ``(n - ell)/(p+1)``.
    """

    n: int
    p: int
    ell: int
    r: int
    alpha: int
    beta: int
    v: int
    lam: int
    q: int
    d: int

    @classmethod
    def of(cls, n: int, p: int) -> "IndexData":
        _check(n, p)
        ell = n % (p + 1)
        r = n % p
        alpha, beta = divmod(n + p * ell - 1, p * (p + 1))
        lam = n // (p * (p + 1))
        q = (n - lam * p * (p + 1) - r) // p
        return cls(n, p, ell, r, alpha, beta, beta // (p + 1), lam, q, (n - ell) // (p + 1))


def counting_range(n: int, j: int, p: int) -> tuple[int, int]:
    """Inclusive range ``(lo, hi)`` of exponents ``s`` counted by ``M_j``.

    The range may be empty (``hi < lo``).
    """
    _check(n, p)
    ell = n % (p + 1)
    lo = _ceil_div(ell - j, p + 1)
    hi = (n + p * ell - 1 - j * (p + 1)) // (p * (p + 1))
    return lo, hi


def z_bruteforce(n: int, k: int, p: int) -> int:
    """``Z(n,k)`` straight from the defining count, ``Z(n,p) = 0``."""
    _check(n, p)
    if not 0 <= k <= p:
        raise ValueError(f"k must lie in [0, {p}], got {k}")
    total = 0
    for j in range(k, p):
        lo, hi = counting_range(n, j, p)
        total += sum(1 for _ in range(lo, hi + 1))
    return total


def z_closed_alpha(n: int, k: int, p: int) -> int:
    """Four-case closed form of ``Z(n,k)`` in terms of ``alpha``, ``ell``, ``v``."""
    _check(n, p)
    if k == p:
        return 0
    if not 0 <= k < p:
        raise ValueError(f"k must lie in [0, {p}], got {k}")
    ix = IndexData.of(n, p)
    ell, v, a = ix.ell, ix.v, ix.alpha
    c = _ceil_div(n - ell, p + 1)
    if k <= ell and k <= v:
        return c - k * a
    if ell < k and v < k:
        return c - k * a + ell - v - 1
    if ell < k <= v:
        return c - k * (a + 1) + ell
    # v < k <= ell
    return c - k * (a - 1) - v - 1


def z_closed_lambda(n: int, k: int, p: int) -> int:
    """Six-case closed form of ``Z(n,k)`` in terms of ``lam``, ``ell``, ``r``."""
    _check(n, p)
    if k == p:
        return 0
    if not 0 <= k < p:
        raise ValueError(f"k must lie in [0, {p}], got {k}")
    ell, r = n % (p + 1), n % p
    f, lam = n // (p + 1), n // (p * (p + 1))
    if ell <= r:
        if k < ell:
            return f - k * lam
        if k < r:
            return f - k * (lam + 1) + ell
        return f - k * lam + ell - r
    if k < r:
        return f - k * (lam + 1)
    if k < ell:
        return f - k * lam - r
    return f - k * (lam + 1) + ell - r


Z = z_closed_alpha


def z_difference(n: int, j: int, p: int) -> int:
    """``Z(n,j) - Z(n,j+1)`` from its case table (``0 <= j <= p-2``)."""
    _check(n, p)
    if not 0 <= j <= p - 2:
        raise ValueError(f"j must lie in [0, {p - 2}], got {j}")
    ell, r, lam = n % (p + 1), n % p, n // (p * (p + 1))
    if ell <= r:
        return lam + 1 if ell <= j < r else lam
    return lam if r <= j < ell else lam + 1


def decay_order(n: int, k: int, p: int) -> int:
    """Order ``N(n,k)`` of the zero at infinity of ``psi_{n,k}``, ``1 <= k <= p``."""
    _check(n, p)
    if not 1 <= k <= p:
        raise ValueError(f"k must lie in [1, {p}], got {k}")
    ell = n % (p + 1)
    return Z(n, k - 1, p) - Z(n, k, p) + (1 if k <= ell else 0)


def hp_multiindex(n: int, p: int) -> tuple[int, ...]:
    """Diagonal multi-index ``(n_0, ..., n_{p-1})`` with ``|n| = n``."""
    _check(n, p)
    return tuple((n - j - 1) // p + 1 for j in range(p))


def orthogonality_ranges(n: int, p: int, k: int = 0) -> list[tuple[int, int, int]]:
    """Orthogonality conditions of ``psi_{n,k}`` against ``mu_{k,j}``.

    Returns triples ``(j, lo, hi)`` meaning
    ``int psi_{n,k}(tau) tau^s dmu_{k,j}(tau) = 0`` for ``lo <= s <= hi``,
    for ``j = k, ..., p-1``.  Empty ranges are kept so callers can index by
    ``j``.  For ``k = 0`` the total count is the degree ``d``.
    """
    _check(n, p)
    if not 0 <= k <= p - 1:
        raise ValueError(f"k must lie in [0, {p - 1}], got {k}")
    out = []
    for j in range(k, p):
        lo, hi = counting_range(n, j, p)
        out.append((j, lo, hi))
    return out


def lemma_exponent(n: int, p: int) -> tuple[int, int, int]:
    """Shift-lemma bookkeeping for ``n >= p``.

    Returns ``(k, e, e_star)`` with ``k = n mod p``,
    ``e = Z(n,k) - Z(n,k+1) - [ell = p]`` and ``e_star`` the exponent after
    absorbing the factor ``tau`` carried by ``dsigma_{n,k}`` when ``k < ell``.
    ``int psi_{n+1,k} tau^e dsigma_{n,k} = int psi_{n+1,k} tau^e_star dsigma*_k``
    vanishes.  ``e`` is -1 for the few small ``n`` with ``lam = 0``, ``ell = p``
    and ``Z(n,k) = Z(n,k+1)``; ``e_star`` is never negative.
    """
    _check(n, p)
    if n < p:
        raise ValueError(f"need n >= p, got n={n}, p={p}")
    k = n % p
    ell = n % (p + 1)
    e = Z(n, k, p) - Z(n, k + 1, p) - (1 if ell == p else 0)
    return k, e, e + (1 if k < ell else 0)
