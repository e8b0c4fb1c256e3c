"""Acceptance criteria 1-11.

Each criterion is a function returning ``(ok, detail)``; the pytest wrappers
print one ``PASS``/``FAIL`` line per criterion and then assert.  Run the file
directly (``python tests/test_acceptance.py``) for the bare report.
Tolerances are pinned below and are not tuned per run.
"""

from __future__ import annotations

import sys
import time
from functools import cache
from pathlib import Path

import numpy as np
from mpmath import mp

sys.path.insert(0, str(Path(__file__).parent))

from oracles import NestedOracle  # noqa: E402

from nikishin import asymptotics as asy  # noqa: E402
from nikishin import equilibrium as eqm  # noqa: E402
from nikishin import hermite_pade as hpm  # noqa: E402
from nikishin.config import load_config, shipped_config  # noqa: E402
from nikishin.indices import Z, decay_order, z_bruteforce, z_closed_alpha, z_closed_lambda  # noqa: E402
from nikishin.measures import DensitySpec, build_mu_hierarchy, validate_system  # noqa: E402
from nikishin.mop import mop_sequence, solve_Qd_checked  # noqa: E402
from nikishin.recurrence import extract_sequence, hessenberg_truncation, interlacing_check  # noqa: E402
from nikishin.secondkind import (  # noqa: E402
    SecondKind,
    recurrence_residual,
    sign_H_formula,
    sign_PP_formula,
    zero_count_audit,
)

# -- pinned tolerances --------------------------------------------------------
C1_P, C1_N, C1_SECONDS = range(1, 7), 5000, 10.0
C2_N, C2_PREC, C2_SECONDS = 36, 256, 300.0
C3_N_AN, C3_RESIDUAL, C3_N_HESS, C3_HESS = 35, mp.mpf(10) ** -20, 30, mp.mpf(10) ** -25
C4_N = 35
C5_N, C5_RESIDUAL, C5_SLOPE = 24, mp.mpf(10) ** -20, 0.05
C6_N, C6_NORM = 24, mp.mpf(10) ** -20
C7_M, C7_W, C7_KS, C7_PROBES, C7_SECONDS = 2000, 1e-3, 2e-3, 20, 120.0
C8_LEGENDRE_M, C8_LEGENDRE_REL, C8_MS, C8_FINAL = 200, 1e-2, (5, 10, 15), 0.15
C9_NS, C9_KS = (12, 24, 36), 0.2
C10_NS, C10_PATHS, C10_NTH = (10, 20, 30), mp.mpf(10) ** -20, 0.15
C11_PROBES, C11_REL = 10, mp.mpf(10) ** -20

P2 = 2
P2_INTERVALS = [(0.0, 1.0), (-2.0, -1.0)]


# -- shared objects ------------------------------------------------------------
@cache
def p2_config():
    return load_config(shipped_config("example-p2"))


@cache
def p2_hierarchy():
    c = p2_config()
    return build_mu_hierarchy(c.system, c.quad_order, c.precision_bits)


@cache
def p2_records():
    return mop_sequence(p2_hierarchy(), p2_config().n_max)


@cache
def p2_an():
    return extract_sequence(p2_records())


@cache
def p2_sk(n: int) -> SecondKind:
    return SecondKind(p2_hierarchy(), p2_records()[n])


@cache
def p2_eq():
    return eqm.solve_vector_equilibrium(P2_INTERVALS, M=p2_config().grid)


@cache
def legendre_an():
    c = load_config(shipped_config("legendre"))
    h = build_mu_hierarchy(c.system, c.quad_order, c.precision_bits)
    return extract_sequence(mop_sequence(h, c.n_max))


def _e(x) -> str:
    return mp.nstr(mp.mpf(x), 3) if not isinstance(x, float) else f"{x:.3g}"


# -- criteria -------------------------------------------------------------------
def criterion_1():
    t0 = time.perf_counter()
    bad = 0
    for p in C1_P:
        for n in range(C1_N + 1):
            for k in range(p + 1):
                b = z_bruteforce(n, k, p)
                if z_closed_alpha(n, k, p) != b or z_closed_lambda(n, k, p) != b:
                    bad += 1
    dt = time.perf_counter() - t0
    return bad == 0 and dt < C1_SECONDS, f"mismatches={bad} time={dt:.2f}s (limit {C1_SECONDS}s)"


def criterion_2():
    t0 = time.perf_counter()
    h = p2_hierarchy()
    issues = []
    for n in range(C2_N + 1):
        rec = solve_Qd_checked(h, n)
        Q = rec.Qn()
        if Q.degree != n:
            issues.append(f"deg Q_{n} = {Q.degree}")
        zs = rec.segment_zeros  # polishing verifies a sign change at each root
        if len(zs) != rec.d or not all(0 < z < 1 for z in zs) or len(set(zs)) != len(zs):
            issues.append(f"roots of Qd at n={n}")
        if any(c != 0 for i, c in enumerate(Q.coeffs) if (i - rec.ell) % (P2 + 1)):
            issues.append(f"sparsity at n={n}")
    dt = time.perf_counter() - t0
    ok = not issues and dt < C2_SECONDS and h.prec == C2_PREC
    return ok, f"n<={C2_N} issues={issues[:3]} time={dt:.1f}s (limit {C2_SECONDS:.0f}s)"


def criterion_3():
    seq = p2_an()
    recs = p2_records()
    an = [seq.a[n] for n in range(P2, C3_N_AN + 1)]
    res = max(seq.residuals[n] for n in range(P2, C3_N_AN + 1))
    worst = mp.zero
    with mp.workprec(p2_hierarchy().prec):
        for n in range(1, C3_N_HESS + 1):
            _, cp = hessenberg_truncation(seq.a, P2, n)
            Q = recs[n].Qn()
            worst = max(worst, max(abs(x - y) for x, y in zip(cp.coeffs, Q.coeffs)) / Q.max_abs())
    ok = all(a > 0 for a in an) and res < C3_RESIDUAL and worst < C3_HESS
    return ok, (
        f"min a_n={_e(min(an))} max residual={_e(res)} (<{_e(C3_RESIDUAL)}) "
        f"hessenberg gap={_e(worst)} (<{_e(C3_HESS)})"
    )


def criterion_4():
    recs = p2_records()
    bad = [n for n in range(P2 + 1, C4_N + 1) if not interlacing_check(recs[n], recs[n + 1]).ok]
    return not bad, f"n in [{P2 + 1}, {C4_N}] violations={bad}"


def criterion_5():
    seq = p2_an()
    probes = [mp.mpc(0.5, 1.0), mp.mpc(-1.5, 0.8), mp.mpc(0, 3), mp.mpc(2.5, -0.4)]
    count_bad, audit_bad = [], []
    res, slope_gap = mp.zero, 0.0
    for n in range(C5_N + 1):
        sk = p2_sk(n)
        for k in range(P2):
            if len(sk.zeros(k)) != Z(n, k, P2):
                count_bad.append((n, k))
            a = zero_count_audit(sk, k)
            if not (a.expected == a.scanned == a.rectangle == a.global_count):
                audit_bad.append((n, k))
        if n >= P2:
            for k in range(P2 + 1):
                res = max(res, recurrence_residual(p2_sk(n - P2), sk, p2_sk(n + 1), seq.a[n], k, probes))
        for k in range(1, P2 + 1):
            slope, pred = sk.decay_slope(k)
            assert pred == -decay_order(n, k, P2)
            slope_gap = max(slope_gap, abs(slope - pred))
    ok = not count_bad and not audit_bad and res < C5_RESIDUAL and slope_gap < C5_SLOPE
    return ok, (
        f"count mismatches={count_bad} audit mismatches={audit_bad} "
        f"recurrence residual={_e(res)} (<{_e(C5_RESIDUAL)}) slope gap={slope_gap:.3g} (<{C5_SLOPE})"
    )


def criterion_6():
    bad_H, bad_PP = [], []
    norm = mp.zero
    for n in range(C6_N + 1):
        sk = p2_sk(n)
        for k in range(P2):
            if sk.sign_H(k) != sign_H_formula(n, k, P2):
                bad_H.append((n, k))
            if k == n % P2 and sk.sign_PP(k) != sign_PP_formula(n, P2):
                bad_PP.append((n, k))
            with mp.workprec(sk.prec):
                norm = max(norm, abs(sk.orthonormality(k) - 1))
    ok = not bad_H and not bad_PP and norm < C6_NORM
    return ok, f"sign_H mismatches={bad_H} sign_PP mismatches={bad_PP} max|norm-1|={_e(norm)} (<{_e(C6_NORM)})"


def criterion_7():
    t0 = time.perf_counter()
    res = eqm.solve_vector_equilibrium([(0.0, 1.0)], M=C7_M)
    m = res.measures[0]
    werr = abs(res.constants[0] - np.log(4))
    x = np.union1d(np.linspace(0, 1, 20001), m.edges)
    ks = float(np.abs(m.cdf(x) - 2 / np.pi * np.arcsin(np.sqrt(x))).max())
    pr = eqm.lemma_probes(res, 0, C7_PROBES)
    lem = float(eqm.lemma_inequality(res, 0, pr).max())
    dt = time.perf_counter() - t0
    ok = werr < C7_W and ks < C7_KS and len(pr) == C7_PROBES and lem < 0 and dt < C7_SECONDS
    return ok, (
        f"|w0-log4|={werr:.2e} (<{C7_W}) KS={ks:.2e} (<{C7_KS}) lemma max={lem:.3f} (<0 at {len(pr)} probes) "
        f"time={dt:.1f}s"
    )


def criterion_8():
    leg = legendre_an()
    g = asy.an_geometric_mean(leg, 0, C8_LEGENDRE_M)
    leg_rel = abs(g - 0.25) / 0.25
    seq = p2_an()
    w = p2_eq().constants
    parts = [f"legendre rel={leg_rel:.2e} (<{C8_LEGENDRE_REL})"]
    ok = leg_rel < C8_LEGENDRE_REL
    for k in range(P2):
        m_top = (max(seq.a) - k) // P2
        gaps = [r[3] for r in asy.geometric_mean_table(seq, k, w, list(C8_MS) + [m_top])]
        mono = all(a > b for a, b in zip(gaps[:3], gaps[1:3]))
        final = gaps[-1] < C8_FINAL
        ok = ok and mono and final
        parts.append(
            f"k={k} gaps m={C8_MS}: {', '.join(f'{v:.3f}' for v in gaps[:3])} decreasing={mono}; "
            f"m={m_top}: {gaps[-1]:.3f} (<{C8_FINAL})"
        )
    return ok, " | ".join(parts)


def criterion_9():
    eq = p2_eq()
    d = [asy.check_zero_distribution(p2_sk(n), 0, eq) for n in C9_NS]
    ok = d[-1] < C9_KS and all(a > b for a, b in zip(d, d[1:]))
    return ok, f"KS at n={C9_NS}: {', '.join(f'{v:.3f}' for v in d)} (final <{C9_KS}, decreasing)"


def criterion_10():
    h = p2_hierarchy()
    cfg = p2_config()
    eq = p2_eq()
    probes = asy.star_probes(P2, P2_INTERVALS, cfg.probe_radii)
    pred = hpm.delta_prediction(eq, probes)
    disc = mp.zero
    sup = {j: [] for j in range(P2)}
    nth_err = 0.0
    for n in C10_NS:
        rec = p2_records()[n]
        sk = p2_sk(n)
        ap = hpm.build_approximant(h, rec)
        for j in range(P2):
            mags = []
            for i, z in enumerate(probes):
                r = hpm.remainder(h, rec, j, complex(z), ap, sk)
                disc = max(disc, r.discrepancy)
                mags.append(abs(r.value))
                if n == C10_NS[-1] and j == 0:
                    with mp.workprec(h.prec):
                        obs = float(mp.log(abs(r.value))) / n
                    nth_err = max(nth_err, abs(np.expm1(obs - pred[i])))
            sup[j].append(max(mags))
    dec = all(all(a > b for a, b in zip(s, s[1:])) for s in sup.values())
    ok = disc < C10_PATHS and dec and nth_err < C10_NTH
    return ok, (
        f"path discrepancy={_e(disc)} (<{_e(C10_PATHS)}) sup|delta| decreasing={dec} "
        f"nth-root error n={C10_NS[-1]}: {nth_err:.3f} (<{C10_NTH})"
    )


def criterion_11():
    systems = [
        ([(0, 1)], [2]),
        ([(0, 1), (-2, -1)], [2, 2]),
        ([(0, 1), (-2, -1), (2, 3)], [2, 0, 1]),
    ]
    worst = mp.zero
    for ivs, gs in systems:
        p = len(ivs)
        sysm = validate_system(p, ivs, [DensitySpec("power", gamma=g) for g in gs])
        h = build_mu_hierarchy(sysm, 96, 256)
        with mp.workprec(256):
            oracle = NestedOracle(ivs, gs)
            a, b = ivs[0]
            c, r = (mp.mpf(a) + b) / 2, mp.mpf(b - a)
            probes = [c + r * mp.expj(2 * mp.pi * (i + 0.5) / C11_PROBES) for i in range(C11_PROBES)]
            for j in range(p):
                for z in probes:
                    ref = oracle.mu_hat(0, j, z)
                    worst = max(worst, abs(h.mu_hat(0, j, z) - ref) / abs(ref))
    return worst < C11_REL, f"p<=3, {C11_PROBES} probes, max relative gap={_e(worst)} (<{_e(C11_REL)})"


CRITERIA = [
    criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6,
    criterion_7, criterion_8, criterion_9, criterion_10, criterion_11,
]


def _report(i: int):
    ok, detail = CRITERIA[i - 1]()
    print(f"{'PASS' if ok else 'FAIL'} criterion {i}: {detail}")
    return ok, detail


def test_criterion_01_z_equivalence():
    ok, detail = _report(1)
    assert ok, detail


def test_criterion_02_normality_structure():
    ok, detail = _report(2)
    assert ok, detail


def test_criterion_03_recurrence():
    ok, detail = _report(3)
    assert ok, detail


def test_criterion_04_interlacing():
    ok, detail = _report(4)
    assert ok, detail


def test_criterion_05_second_kind():
    ok, detail = _report(5)
    assert ok, detail


def test_criterion_06_sign_ledgers():
    ok, detail = _report(6)
    assert ok, detail


def test_criterion_07_scalar_equilibrium():
    ok, detail = _report(7)
    assert ok, detail


def test_criterion_08_geometric_means():
    ok, detail = _report(8)
    assert ok, detail


def test_criterion_09_zero_distribution():
    ok, detail = _report(9)
    assert ok, detail


def test_criterion_10_hermite_pade():
    ok, detail = _report(10)
    assert ok, detail


def test_criterion_11_hierarchy_oracle():
    ok, detail = _report(11)
    assert ok, detail


def main() -> int:
    results = [_report(i)[0] for i in range(1, len(CRITERIA) + 1)]
    print(f"{sum(results)}/{len(results)} criteria pass")
    return 0 if all(results) else 1


if __name__ == "__main__":
    sys.exit(main())
