import pytest
from mpmath import mp

from nikishin.indices import Z, decay_order
from nikishin.measures import PoleProximityError
from nikishin.secondkind import (
    recurrence_residual,
    shift_lemma_defect,
    sign_H_formula,
    sign_H_step,
    sign_PP_formula,
    zero_count_audit,
)

PROBES = [mp.mpc(0.5, 1.0), mp.mpc(-1.5, 0.8), mp.mpc(0, 3), mp.mpc(2.5, -0.4)]
TOL = mp.mpf(10) ** -20


def test_level_zero_is_qd(p2_sk, p2_records):
    sk = p2_sk[20]
    with mp.workprec(sk.prec):
        zs, ref = sk.zeros(0), p2_records[20].segment_zeros
        assert len(zs) == len(ref)
        assert all(abs(a - b) < mp.mpf(10) ** -60 for a, b in zip(zs, ref))


@pytest.mark.parametrize("n", [6, 13, 20, 24])
def test_zero_counts(p2_sk, n):
    sk = p2_sk[n]
    for k in range(2):
        zs = sk.zeros(k)
        assert len(zs) == Z(n, k, 2)
        a, b = sk.h.interval(k)
        assert all(a < z < b for z in zs)


@pytest.mark.parametrize("n", [7, 18])
def test_argument_principle_audit(p2_sk, n):
    for k in range(2):
        au = zero_count_audit(p2_sk[n], k)
        assert au.expected == au.scanned == au.rectangle == au.global_count


def test_p30_k1_five_zeros(p2_sk):
    assert len(p2_sk[30].zeros(1)) == 5


@pytest.mark.parametrize("n", range(2, 24, 3))
def test_recurrence_of_second_kind(p2_sk, p2_an, n):
    for k in range(3):
        r = recurrence_residual(p2_sk[n - 2], p2_sk[n], p2_sk[n + 1], p2_an.a[n], k, PROBES)
        assert r < TOL


@pytest.mark.parametrize("n", range(2, 25))
def test_shift_lemma(p2_sk, n):
    assert shift_lemma_defect(p2_sk[n], p2_sk[n + 1]) < TOL


@pytest.mark.parametrize("n", [5, 12, 23])
def test_orthogonality_defects(p2_sk, n):
    for k in range(2):
        d = p2_sk[n].orthogonality_defects(k)
        assert max(d.values()) < TOL


def test_sign_ledgers_and_orthonormality(p2_sk):
    for n in range(0, 25):
        sk = p2_sk[n]
        for k in range(2):
            assert sk.sign_H(k) == sign_H_formula(n, k, 2)
            if k >= 1:
                assert sk.sign_H(k) * sk.sign_H(k - 1) == sign_H_step(n, k, 2)
            if k == n % 2:
                assert sk.sign_PP(k) == sign_PP_formula(n, 2)
            with mp.workprec(sk.prec):
                assert abs(sk.orthonormality(k) - 1) < TOL


def test_decay_slopes(p2_sk):
    for n in (4, 11, 19):
        for k in (1, 2):
            slope, pred = p2_sk[n].decay_slope(k)
            assert pred == -decay_order(n, k, 2)
            assert abs(slope - pred) < 0.05


def test_psi_symmetries(p2_sk):
    sk = p2_sk[14]
    with mp.workprec(sk.prec):
        om = sk.h.omega
        z = mp.mpc(0.6, 0.45)
        for k in range(3):
            assert abs(sk.psi(k, mp.conj(z)) - mp.conj(sk.psi(k, z))) < mp.mpf(10) ** -60 * abs(sk.psi(k, z))
            lhs = sk.Psi(k, om * z)
            rhs = om ** (sk.n - k) * sk.Psi(k, z)
            assert abs(lhs - rhs) < mp.mpf(10) ** -60 * abs(rhs)


def test_psi_on_cut_raises(p2_sk):
    sk = p2_sk[9]
    with pytest.raises(PoleProximityError):
        sk.psi(1, sk.h.sigma[0].nodes[10])


def test_bundles(p2_sk):
    b = p2_sk[12].bundles()
    assert [x.k for x in b] == [0, 1, 2]
    assert b[2].Pnk.degree == 0
    assert b[0].Pnk.degree == Z(12, 0, 2)
