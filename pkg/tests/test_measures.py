import pytest
from mpmath import mp

from nikishin.measures import (
    DensitySpec,
    InvalidSystem,
    PoleProximityError,
    build_mu_hierarchy,
    cauchy_transform,
    segment_quadrature,
    star_to_segment,
    validate_system,
)
from oracles import NestedOracle

SQ = DensitySpec("power", gamma=2)
LEB = DensitySpec("power", gamma=0)


def test_accepts_example_system():
    s = validate_system(2, [(0, 1), (-2, -1)], [SQ, SQ])
    assert s.p == 2


@pytest.mark.parametrize(
    "p,intervals",
    [
        (2, [(0, 1), (0, 1)]),  # odd index on the positive side
        (2, [(-1, 0), (-2, -1)]),  # even index on the negative side
        (2, [(0, 1), (-1, 0)]),  # both touch the origin
        (1, [(1, 1)]),  # degenerate
        (2, [(0, 1)]),  # wrong count
    ],
)
def test_rejects_bad_geometry(p, intervals):
    with pytest.raises(InvalidSystem):
        validate_system(p, intervals, [LEB] * len(intervals))


def test_rejects_bad_densities():
    with pytest.raises(InvalidSystem):
        validate_system(1, [(0, 1)], [DensitySpec("power", gamma=-1)])
    with pytest.raises(InvalidSystem):
        validate_system(1, [(0, 1)], [DensitySpec("tabulated", abscissae=(0, 1), values=(0, 0))])
    with pytest.raises(InvalidSystem):
        validate_system(1, [(0, 1)], [DensitySpec("tabulated", abscissae=(0, 0.5), values=(1, 1))])
    with pytest.raises(InvalidSystem):
        validate_system(1, [(0, 1)], [DensitySpec("gaussian")])


def test_star_to_segment_exponent():
    # |t|^2 |dt| on the rays of p = 2 pushes forward to Lebesgue in tau
    (lo, hi), g = star_to_segment((-2 ** (1 / 3.0), -1), 2, 2)
    assert g == 0
    assert hi == -1


def test_segment_quadrature_tabulated_mass():
    with mp.workprec(192):
        d = DensitySpec("tabulated", abscissae=(0, 0.5, 1), values=(0, 2, 0))
        m = segment_quadrature(d, (0, 1), 10)
        assert abs(m.mass() - 1) < mp.mpf(10) ** -50


def test_mu01_weights_positive(p2_hierarchy):
    # tau > 0 on E_0 and mu_hat_{1,1}(tau) > 0 there since E_1 lies to the left
    mu = p2_hierarchy.mu[(0, 1)]
    assert mu.declared_sign == 1
    assert all(w > 0 for w in mu.weights)


def test_rotation_symmetry(p2_hierarchy):
    h = p2_hierarchy
    p = h.p
    with mp.workprec(h.prec):
        om = h.omega
        for z in (mp.mpc(1.3, 0.7), mp.mpc(-0.4, 2.1)):
            for k in range(p):
                for j in range(k, p):
                    lhs = h.s_hat(k, j, om * z) * om ** (j + 1 - k)
                    assert abs(lhs - h.s_hat(k, j, z)) < mp.mpf(10) ** -60 * abs(h.s_hat(k, j, z))


def test_arcsine_cauchy_transform():
    # Jacobi(-1/2, -1/2) on [-1, 1]: int dx / (pi sqrt(1-x^2) (z-x)) = 1/sqrt(z^2-1)
    with mp.workprec(256):
        s = segment_quadrature(DensitySpec("jacobi", alpha="-0.5", beta="-0.5"), (-1, 1), 80)
        for z in (mp.mpf(3), mp.mpc(0.2, 1.5)):
            got = cauchy_transform(s, z) / mp.pi
            exact = 1 / (mp.sqrt(z - 1) * mp.sqrt(z + 1))
            assert abs(got - exact) < mp.mpf(10) ** -40


def test_pole_guard():
    with mp.workprec(128):
        s = segment_quadrature(LEB, (0, 1), 5)
        with pytest.raises(PoleProximityError):
            cauchy_transform(s, s.nodes[2])


@pytest.mark.parametrize(
    "intervals,gammas",
    [
        ([(0, 1), (-2, -1)], [2, 2]),
        ([(0, 1), (-2, -1), (2, 3)], [2, 0, 1]),
        ([(1, 2), (-1, 0)], [0, 3]),
    ],
)
def test_hierarchy_matches_nested_oracle(intervals, gammas):
    p = len(intervals)
    sys = validate_system(p, intervals, [DensitySpec("power", gamma=g) for g in gammas])
    h = build_mu_hierarchy(sys, 96, 256)
    with mp.workprec(256):
        oracle = NestedOracle(intervals, gammas)
        a, b = intervals[0]
        c, r = (mp.mpf(a) + b) / 2, mp.mpf(b - a)
        probes = [c + r * mp.expj(2 * mp.pi * (i + 0.5) / 10) for i in range(10)]
        for j in range(p):
            for z in probes:
                ref = oracle.mu_hat(0, j, z)
                assert abs(h.mu_hat(0, j, z) - ref) <= mp.mpf(10) ** -20 * abs(ref)
