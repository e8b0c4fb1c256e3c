import pytest
from hypothesis import given
from hypothesis import strategies as st

from nikishin.indices import (
    IndexData,
    Z,
    decay_order,
    hp_multiindex,
    lemma_exponent,
    orthogonality_ranges,
    z_bruteforce,
    z_closed_alpha,
    z_closed_lambda,
    z_difference,
)


@pytest.mark.parametrize("p", range(1, 7))
def test_three_routes_agree(p):
    for n in range(600):
        for k in range(p + 1):
            b = z_bruteforce(n, k, p)
            assert z_closed_alpha(n, k, p) == b
            assert z_closed_lambda(n, k, p) == b


@pytest.mark.parametrize("p", range(1, 7))
def test_index_data_identities(p):
    for n in range(400):
        ix = IndexData.of(n, p)
        assert n + p * ix.ell - 1 == ix.alpha * p * (p + 1) + ix.beta
        assert n == ix.lam * p * (p + 1) + p * ix.q + ix.r
        assert 0 <= ix.q < p + 1
        assert (p + 1) * ix.d + ix.ell == n


@pytest.mark.parametrize("p", range(1, 7))
def test_z0_is_reduced_degree(p):
    for n in range(400):
        assert Z(n, 0, p) == IndexData.of(n, p).d
        assert sum(hi - lo + 1 for _, lo, hi in orthogonality_ranges(n, p) if hi >= lo) == IndexData.of(n, p).d


@pytest.mark.parametrize("p", range(2, 7))
def test_difference_table(p):
    for n in range(400):
        for j in range(p - 1):
            assert z_difference(n, j, p) == Z(n, j, p) - Z(n, j + 1, p)


@pytest.mark.parametrize("p", range(1, 7))
def test_z_monotone_and_decay_order_positive(p):
    for n in range(p, 400):
        zs = [Z(n, k, p) for k in range(p + 1)]
        assert all(a >= b for a, b in zip(zs, zs[1:]))
        for k in range(1, p + 1):
            N = decay_order(n, k, p)
            assert N >= 0
            # psi_{n,k} is O(1) at infinity only for a few degrees below p(p+1)
            if n >= p * (p + 1):
                assert N >= 1


def test_decay_order_zero_cases():
    assert [(n, k) for n in range(2, 40) for k in (1, 2) if decay_order(n, k, 2) == 0] == [(3, 2)]
    assert decay_order(30, 1, 2) == 5


def test_small_hand_values():
    # p = 1: Z(n,0) = floor(n/2)
    assert [Z(n, 0, 1) for n in range(8)] == [0, 0, 1, 1, 2, 2, 3, 3]
    # p = 2, n = 6: ell = 0, Q_6 = Q_2(z^3), two conditions split over mu_{0,0} and mu_{0,1}
    assert [Z(6, k, 2) for k in range(3)] == [2, 1, 0]


@pytest.mark.parametrize("p", range(1, 7))
def test_multiindex(p):
    for n in range(200):
        m = hp_multiindex(n, p)
        assert sum(m) == n
        assert max(m) - min(m) <= 1
        assert list(m) == sorted(m, reverse=True)


def test_lemma_exponent_star_nonnegative():
    for p in range(1, 7):
        for n in range(p, 3000):
            _, e, e_star = lemma_exponent(n, p)
            assert e_star >= 0
            assert e >= -1


def test_lemma_exponent_negative_cases():
    assert lemma_exponent(2, 2)[1] == -1
    assert [n for n in range(3, 40) if lemma_exponent(n, 3)[1] < 0] == [3, 7, 11]


@pytest.mark.parametrize("bad", [(-1, 0, 2), (3, 3, 2), (3, -1, 2)])
def test_rejects_out_of_range(bad):
    n, k, p = bad
    with pytest.raises(ValueError):
        z_closed_alpha(n, k, p)
    with pytest.raises(ValueError):
        z_bruteforce(n, k, p)


def test_rejects_bad_p():
    with pytest.raises(ValueError):
        IndexData.of(3, 0)


@given(st.integers(1, 12), st.integers(0, 10**5), st.data())
def test_routes_agree_at_large_degree(p, n, data):
    k = data.draw(st.integers(0, p))
    b = z_bruteforce(n, k, p)
    assert z_closed_alpha(n, k, p) == b == z_closed_lambda(n, k, p)
    # linear growth with a bounded remainder
    assert abs(b - n * (p - k) / (p * (p + 1))) <= p + 1
