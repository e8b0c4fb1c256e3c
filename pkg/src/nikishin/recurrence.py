"""The order ``p+1`` three-term recurrence ``Q_{n+1} = z Q_n - a_n Q_{n-p}``."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

from mpmath import mp

from .mop import QnRecord
from .polys import MonicPoly, Poly


class RecurrenceError(ArithmeticError):
    """Recurrence defect above tolerance, or a nonpositive coefficient."""


@dataclass
class RecurrenceSequence:
    """Recurrence coefficients ``a_n`` (``n >= p``) with their defects."""

    p: int
    a: dict = field(default_factory=dict)
    residuals: dict = field(default_factory=dict)

    def check(self, tol) -> None:
        for n, v in self.a.items():
            if not v > 0:
                raise RecurrenceError(f"a_{n} = {v} is not positive")
            if self.residuals.get(n, 0) > tol:
                raise RecurrenceError(f"recurrence defect {self.residuals[n]} at n={n} above {tol}")


def extract_an(Qnp1: Poly, Qn: Poly, Qnmp: Poly):
    """Read ``a_n`` off ``z Q_n - Q_{n+1}`` and return it with the relative defect.

    The defect is the max-norm of ``z Q_n - Q_{n+1} - a_n Q_{n-p}`` divided
    by the max-norm of ``z Q_n`` (exactly zero for exact arithmetic on
    consistent inputs).
    """
    n = Qn.degree
    k = Qnmp.degree
    if Qnp1.degree != n + 1:
        raise ValueError("degree mismatch between Q_{n+1} and Q_n")
    diff = Qn.shift(1) - Qnp1
    a = diff[k] / Qnmp[k]
    res = diff - Qnmp.scale(a)
    scale = Qn.max_abs()
    defect = res.max_abs() / scale if scale else res.max_abs()
    return a, defect


def extract_sequence(records: Sequence[QnRecord]) -> RecurrenceSequence:
    """``a_n`` for every ``n`` with ``n-p >= 0`` and ``n+1`` in ``records``."""
    p = records[0].p
    seq = RecurrenceSequence(p)
    polys = [r.Qn() for r in records]
    with mp.workprec(records[0].prec):
        for n in range(p, len(records) - 1):
            a, res = extract_an(polys[n + 1], polys[n], polys[n - p])
            seq.a[n] = a
            seq.residuals[n] = res
    return seq


def _coef(a, n: int):
    return a[n] if isinstance(a, Mapping) else a[n]


def generate_by_recurrence(a, p: int, N: int) -> list[MonicPoly]:
    """``Q_0, ..., Q_N`` from ``Q_ell = z^ell`` (``ell <= p``) and the recurrence.

    ``a`` is indexable by ``n`` for ``p <= n < N`` (a list whose first ``p``
    entries are ignored, or a mapping).  The arithmetic follows the scalar
    type of ``a``, so ``Fraction`` input gives exact output.
    """
    out = []
    for ell in range(min(N, p) + 1):
        out.append(MonicPoly((0,) * ell + (1,)))
    for n in range(p, N):
        an = _coef(a, n)
        nxt = out[n].shift(1) - out[n - p].scale(an)
        c = list(nxt.coeffs)
        c[-1] = 1
        out.append(MonicPoly(tuple(c)))
    return out[: N + 1]


def hessenberg_matrix(a, p: int, n: int) -> list[list]:
    """Leading ``n x n`` block of the banded Hessenberg operator.

    Ones on the superdiagonal, ``a_{p+i}`` in position ``(p+i, i)``.
    """
    zero = 0 * _coef(a, p) if n > p else 0
    H = [[zero] * n for _ in range(n)]
    for i in range(n - 1):
        H[i][i + 1] = 1
    for i in range(p, n):
        H[i][i - p] = _coef(a, i)
    return H


def charpoly(M: list[list]) -> MonicPoly:
    """``det(zI - M)`` by the division-free Berkowitz algorithm.

    Exact on integers/fractions; at working precision on mpf entries.
    """
    n = len(M)
    if n == 0:
        return MonicPoly((1,))
    # descending coefficients of the char poly of the leading k x k block
    poly = [1, -M[0][0]]
    for k in range(1, n):
        A = [row[:k] for row in M[:k]]
        r = M[k][:k]
        c = [M[i][k] for i in range(k)]
        col = [1, -M[k][k]]
        v = c
        for _ in range(k):
            col.append(-sum(ri * vi for ri, vi in zip(r, v)))
            v = [sum(A[i][j] * v[j] for j in range(k)) for i in range(k)]
        # col has k+2 entries; Toeplitz product with poly (length k+1)
        new = []
        for i in range(k + 2):
            new.append(sum(col[i - j] * poly[j] for j in range(max(0, i - k - 1), min(i, k) + 1)))
        poly = new
    coeffs = list(reversed(poly))
    coeffs[-1] = 1
    return MonicPoly(tuple(coeffs))


def hessenberg_truncation(a, p: int, n: int):
    """The ``n x n`` truncation and its characteristic polynomial."""
    H = hessenberg_matrix(a, p, n)
    return H, charpoly(H)


@dataclass(frozen=True)
class InterlacingReport:
    ok: bool
    n: int
    merged: tuple
    detail: str = ""


def interlacing_check(rec_n: QnRecord, rec_np1: QnRecord) -> InterlacingReport:
    """Strict interlacing of the nonzero zeros of ``Q_n`` and ``Q_{n+1}`` along a ray.

    Both sets of segment zeros are merged; after sorting, labels must
    alternate between the two polynomials.  Equal values are a failure.
    """
    za = [(x, 0) for x in rec_n.segment_zeros]
    zb = [(x, 1) for x in rec_np1.segment_zeros]
    merged = sorted(za + zb, key=lambda t: t[0])
    for i in range(1, len(merged)):
        if merged[i][0] == merged[i - 1][0]:
            return InterlacingReport(False, rec_n.n, tuple(merged), f"common zero at {merged[i][0]}")
        if merged[i][1] == merged[i - 1][1]:
            return InterlacingReport(False, rec_n.n, tuple(merged), f"two consecutive zeros of the same polynomial near {mp.nstr(merged[i][0], 8)}")
    if abs(len(za) - len(zb)) > 1:
        return InterlacingReport(False, rec_n.n, tuple(merged), "zero counts differ by more than one")
    return InterlacingReport(True, rec_n.n, tuple(merged))
