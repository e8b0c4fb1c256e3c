from fractions import Fraction

import pytest
from mpmath import mp

from nikishin.polys import MonicPoly
from nikishin.recurrence import (
    RecurrenceError,
    RecurrenceSequence,
    charpoly,
    extract_an,
    generate_by_recurrence,
    hessenberg_truncation,
    interlacing_check,
)


def test_charpoly_exact_small():
    M = [[Fraction(2), Fraction(1)], [Fraction(3), Fraction(4)]]
    # z^2 - 6z + 5
    assert charpoly(M).coeffs == (5, -6, 1)


def test_charpoly_matches_recurrence_exactly():
    p = 2
    a = {n: Fraction(n + 1, n + 3) for n in range(p, 20)}
    polys = generate_by_recurrence(a, p, 15)
    for n in range(1, 16):
        _, cp = hessenberg_truncation(a, p, n)
        assert cp.coeffs == polys[n].coeffs


def test_generate_symmetry_pattern():
    p = 3
    a = {n: Fraction(1, n) for n in range(p, 30)}
    for n, Q in enumerate(generate_by_recurrence(a, p, 25)):
        ell = n % (p + 1)
        assert all(c == 0 for i, c in enumerate(Q.coeffs) if (i - ell) % (p + 1))


def test_extract_roundtrip():
    p = 2
    a = {n: Fraction(n, 7) + 1 for n in range(p, 12)}
    Q = generate_by_recurrence(a, p, 11)
    for n in range(p, 10):
        got, defect = extract_an(Q[n + 1], Q[n], Q[n - p])
        assert got == a[n]
        assert defect == 0


def test_extracted_positive_and_consistent(p2_an):
    with mp.workprec(256):
        for n in range(2, 45):
            assert p2_an.a[n] > 0
            assert p2_an.residuals[n] < mp.mpf(10) ** -20


def test_hessenberg_reproduces_qn(p2_an, p2_records):
    with mp.workprec(256):
        for n in (5, 12, 24, 30):
            _, cp = hessenberg_truncation(p2_an.a, 2, n)
            Q = p2_records[n].Qn()
            gap = max(abs(x - y) for x, y in zip(cp.coeffs, Q.coeffs)) / Q.max_abs()
            assert gap < mp.mpf(10) ** -25


def test_interlacing(p2_records):
    for n in range(3, 44):
        rep = interlacing_check(p2_records[n], p2_records[n + 1])
        assert rep.ok, rep.detail


def test_interlacing_detects_violation(p2_records):
    rec = p2_records[20]
    assert not interlacing_check(rec, rec).ok


def test_sequence_check_raises():
    seq = RecurrenceSequence(1, {1: mp.mpf(-1)}, {1: mp.zero})
    with pytest.raises(RecurrenceError):
        seq.check(mp.mpf(1))


def test_legendre_hessenberg_eigen_symmetric():
    # p = 1 with a_n = n^2/(4n^2-1): the truncation charpoly is the monic Legendre polynomial of z
    a = {n: Fraction(n * n, 4 * n * n - 1) for n in range(1, 12)}
    _, cp = hessenberg_truncation(a, 1, 4)
    # monic P_4 = z^4 - 6/7 z^2 + 3/35
    assert cp.coeffs == (Fraction(3, 35), 0, Fraction(-6, 7), 0, 1)


def test_monicpoly_from_roots():
    P = MonicPoly.from_roots([1, 2])
    assert tuple(P.coeffs) == (2, -3, 1)
