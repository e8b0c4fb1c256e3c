"""Command-line driver: ``nikishin <stage> --config PATH [options]``.

Every stage writes RFC-4180 CSV tables plus a ``manifest.json`` into
``<out>/<config-hash>/<stage>/``.  Outputs contain no timestamps, so a rerun
with the same configuration reproduces them byte for byte.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import platform
import sys
import traceback
from functools import cached_property
from pathlib import Path

import mpmath
import numpy as np
import scipy
from mpmath import mp

from . import asymptotics as asy
from . import equilibrium as eqm
from . import hermite_pade as hpm
from .config import ConfigError, RunConfig, load_config, shipped_config
from .indices import Z
from .measures import InvalidSystem, build_mu_hierarchy
from .mop import mop_sequence, solve_Qd_checked
from .recurrence import extract_sequence, hessenberg_truncation, interlacing_check
from .secondkind import SecondKind, sign_H_formula, sign_PP_formula, zero_count_audit

VERSION = "0.1.0"
STAGES = ("polys", "recurrence", "second-kind", "equilibrium", "asymptotics", "hp", "figures")
FIGURE_DEGREES = (29, 30, 45)


def _dec(v, prec: int) -> str:
    """Decimal string carrying the full binary precision."""
    with mp.workprec(prec):
        return mp.nstr(v, int(prec * math.log10(2)) + 1, strip_zeros=False)


def _f(v) -> str:
    return repr(float(v))


class Context:
    """Shared, lazily built objects for one configuration."""

    def __init__(self, cfg: RunConfig, n: int | None = None):
        self.cfg = cfg
        self.n = n

    @property
    def prec(self) -> int:
        return self.cfg.precision_bits

    @property
    def n_top(self) -> int:
        return max(self.cfg.n_max, self.n or 0)

    @cached_property
    def hierarchy(self):
        return build_mu_hierarchy(self.cfg.system, self.cfg.quad_order, self.prec)

    def records(self, N: int) -> list:
        have = self.__dict__.get("_records", [])
        if len(have) <= N:
            have = mop_sequence(self.hierarchy, max(N, self.n_top))
            self.__dict__["_records"] = have
        return have[: N + 1]

    def second_kind(self, n: int) -> SecondKind:
        cache = self.__dict__.setdefault("_sk", {})
        if n not in cache:
            cache[n] = SecondKind(self.hierarchy, self.records(n)[n])
        return cache[n]

    @cached_property
    def equilibrium(self):
        return eqm.solve_vector_equilibrium([(float(a), float(b)) for a, b in self.cfg.system.intervals], M=self.cfg.grid)


class StageWriter:
    """Collects the CSV tables of one stage and writes them with a manifest."""

    def __init__(self, root: Path, stage: str, ctx: Context):
        self.dir = root / stage
        self.stage = stage
        self.ctx = ctx
        self.files: list[dict] = []
        self.summary: dict = {}

    def table(self, name: str, header: list, rows) -> None:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\r\n")
        w.writerow(header)
        count = 0
        for r in rows:
            w.writerow(r)
            count += 1
        self._write(name, buf.getvalue().encode("utf-8"), rows=count)

    def json(self, name: str, obj) -> None:
        self._write(name, (json.dumps(obj, sort_keys=True, indent=2) + "\n").encode("utf-8"))

    def _write(self, name: str, data: bytes, rows: int | None = None) -> None:
        self.dir.mkdir(parents=True, exist_ok=True)
        (self.dir / name).write_bytes(data)
        entry = {"name": name, "sha256": hashlib.sha256(data).hexdigest()}
        if rows is not None:
            entry["rows"] = rows
        self.files.append(entry)

    def manifest(self, status: str, error: dict | None = None) -> dict:
        cfg = self.ctx.cfg
        man = {
            "stage": self.stage,
            "status": status,
            "config_hash": cfg.digest(),
            "config": cfg.canonical(),
            "precision_bits": cfg.precision_bits,
            "decimal_digits": int(cfg.precision_bits * math.log10(2)) + 1,
            "versions": {
                "nikishin": VERSION,
                "python": platform.python_version(),
                "numpy": np.__version__,
                "scipy": scipy.__version__,
                "mpmath": mpmath.__version__,
            },
            "files": self.files,
            "summary": self.summary,
        }
        if error is not None:
            man["error"] = error
        self.dir.mkdir(parents=True, exist_ok=True)
        (self.dir / "manifest.json").write_text(json.dumps(man, sort_keys=True, indent=2) + "\n", encoding="utf-8")
        return man


# -- stages -------------------------------------------------------------------
def stage_polys(ctx: Context, out: StageWriter) -> None:
    n = ctx.n if ctx.n is not None else ctx.cfg.n_max
    recs = ctx.records(max(n, ctx.cfg.n_max))
    prec = ctx.prec
    out.table(
        "normality.csv",
        ["n", "ell", "d", "degree", "orthogonality_residual"],
        ([r.n, r.ell, r.d, r.Qn().degree, _dec(r.meta.get("orthogonality_residual", 0), prec)] for r in recs),
    )
    rec = recs[n]
    solved = solve_Qd_checked(ctx.hierarchy, n)
    with mp.workprec(prec):
        agree = max((abs(x - y) for x, y in zip(rec.Qd.coeffs, solved.Qd.coeffs)), default=mp.zero)
    out.table("coefficients.csv", ["n", "i", "coefficient"], ([n, i, _dec(c, prec)] for i, c in enumerate(rec.Qd.coeffs)))
    out.table("segment_roots.csv", ["n", "i", "tau"], ([n, i, _dec(t, prec)] for i, t in enumerate(rec.segment_zeros)))
    out.table(
        "zeros.csv",
        ["n", "i", "re", "im"],
        ([n, i, _dec(mp.re(z), prec), _dec(mp.im(z), prec)] for i, z in enumerate(rec.star_zeros)),
    )
    out.summary = {
        "n": n,
        "ell": rec.ell,
        "d": rec.d,
        "pivot": _dec(solved.pivot, prec),
        "routes_max_coefficient_gap": _dec(agree, prec),
    }


def stage_recurrence(ctx: Context, out: StageWriter) -> None:
    cfg = ctx.cfg
    N = cfg.n_max
    recs = ctx.records(N)
    p, prec = cfg.p, ctx.prec
    seq = extract_sequence(recs)
    out.table(
        "an.csv",
        ["n", "a_n", "residual"],
        ([n, _dec(seq.a[n], prec), _dec(seq.residuals[n], prec)] for n in sorted(seq.a)),
    )
    rows = []
    with mp.workprec(prec):
        for n in range(p, min(N, 30) + 1):
            _, cp = hessenberg_truncation(seq.a, p, n)
            Qn = recs[n].Qn()
            scale = Qn.max_abs()
            rows.append([n, _dec(max(abs(x - y) for x, y in zip(cp.coeffs, Qn.coeffs)) / scale, prec)])
    out.table("hessenberg.csv", ["n", "relative_gap"], rows)
    rows = []
    for n in range(p + 1, N):
        rep = interlacing_check(recs[n], recs[n + 1])
        rows.append([n, int(rep.ok), rep.detail])
    out.table("interlacing.csv", ["n", "ok", "detail"], rows)
    out.summary = {
        "positive": all(v > 0 for v in seq.a.values()),
        "interlacing_ok": all(r[1] for r in rows),
    }


def stage_second_kind(ctx: Context, out: StageWriter) -> None:
    cfg = ctx.cfg
    p, prec = cfg.p, ctx.prec
    N = ctx.n if ctx.n is not None else min(cfg.n_max, 24)
    ctx.records(N)
    rows, audits, decay = [], [], []
    for n in range(N + 1):
        sk = ctx.second_kind(n)
        for k in range(p):
            with mp.workprec(prec):
                orth = abs(sk.orthonormality(k) - 1)
            rows.append(
                [
                    n, k, Z(n, k, p), len(sk.zeros(k)), _dec(sk.K(k), prec), _dec(sk.kappa(k), prec), sk.eps(k),
                    sk.sign_H(k), sign_H_formula(n, k, p), sk.sign_PP(k),
                    sign_PP_formula(n, p) if k == n % p else "", _dec(orth, prec),
                ]
            )
            a = zero_count_audit(sk, k)
            audits.append([n, k, a.expected, a.scanned, "" if a.rectangle is None else a.rectangle, a.global_count])
        for k in range(1, p + 1):
            slope, pred = sk.decay_slope(k)
            decay.append([n, k, _f(slope), pred])
    out.table(
        "second_kind.csv",
        ["n", "k", "Z", "zeros", "K", "kappa", "eps", "sign_H", "sign_H_formula", "sign_PP", "sign_PP_formula",
         "orthonormality_error"],
        rows,
    )
    out.table("zero_audit.csv", ["n", "k", "Z", "scanned", "rectangle", "global"], audits)
    out.table("decay.csv", ["n", "k", "slope", "predicted"], decay)
    out.summary = {
        "n_max": N,
        "zero_counts_ok": all(r[2] == r[3] for r in rows),
        "audit_ok": all(a[2] == a[3] == a[5] and a[4] in ("", a[2]) for a in audits),
        "sign_H_ok": all(r[7] == r[8] for r in rows),
        "decay_max_gap": max((abs(float(d[2]) - d[3]) for d in decay), default=0.0),
    }


def stage_equilibrium(ctx: Context, out: StageWriter) -> None:
    res = ctx.equilibrium
    rows = []
    for k, m in enumerate(res.measures):
        for x, dns, w in zip(m.midpoints, m.density, m.weights):
            rows.append([k, _f(x), _f(dns), _f(w)])
    out.table("measures.csv", ["k", "midpoint", "density", "weight"], rows)
    rows = []
    for k, (m, r) in enumerate(zip(res.measures, res.residual_profiles)):
        for x, v in zip(m.midpoints, r):
            rows.append([k, _f(x), _f(v)])
    out.table("residuals.csv", ["k", "midpoint", "residual"], rows)
    lemma = []
    for k in range(res.p):
        pr = eqm.lemma_probes(res, k)
        lemma.append(float(eqm.lemma_inequality(res, k, pr).max()))
    summary = {
        "w": [float(w) for w in res.constants],
        "w_spread": [float(s) for s in res.spread],
        "multipliers": [float(x) for x in res.multipliers],
        "energy": res.energy,
        "iterations": res.iterations,
        "residual_sup": [float(np.abs(r).max()) for r in res.residual_profiles],
        "support_fraction": [eqm.support_fraction(m) for m in res.measures],
        "lemma_max": lemma,
        "grid": ctx.cfg.grid,
    }
    out.json("summary.json", summary)
    out.summary = summary


def _trend_degrees(cfg: RunConfig) -> list:
    step = 4 * (cfg.p + 1) if cfg.p > 1 else 10
    out = list(range(step, cfg.n_max + 1, step))
    return out or [cfg.n_max]


def stage_asymptotics(ctx: Context, out: StageWriter) -> None:
    cfg = ctx.cfg
    p = cfg.p
    res = ctx.equilibrium
    ns = _trend_degrees(cfg)
    ctx.records(max(ns))
    rows = []
    for n in ns:
        sk = ctx.second_kind(n)
        for k in range(p):
            if Z(n, k, p) == 0:
                continue
            rows.append([n, k, _f(asy.check_zero_distribution(sk, k, res))])
        rows.append([n, "star", _f(asy.star_zero_distance(sk.rec, res))])
    out.table("zero_distribution.csv", ["n", "k", "distance"], rows)
    recs = ctx.records(cfg.n_max)
    seq = extract_sequence(recs)
    rows = []
    for k in range(p):
        mmax = (max(seq.a) - k) // p if seq.a else 0
        for m, g, pred, rel in asy.geometric_mean_table(seq, k, res.constants, range(1, mmax + 1)):
            rows.append([k, m, _f(g), _f(pred), _f(rel)])
    out.table("geometric_means.csv", ["k", "m", "geometric_mean", "prediction", "relative_error"], rows)
    n = ns[-1]
    sk = ctx.second_kind(n)
    probes = asy.segment_probes(cfg.system.intervals)
    rows = []
    for k in range(p + 1):
        chk = asy.check_nthroot_psi(sk, k, res, probes)
        for z, o, pr in zip(probes, chk.observed, chk.predicted):
            rows.append([n, k, _f(z.real), _f(z.imag), _f(o), _f(pr)])
    out.table("nthroot_psi.csv", ["n", "k", "re", "im", "observed", "predicted"], rows)
    out.summary = {"degrees": ns, "nthroot_degree": n}


def stage_hp(ctx: Context, out: StageWriter) -> None:
    cfg = ctx.cfg
    p = cfg.p
    h = ctx.hierarchy
    res = ctx.equilibrium
    ns = [n for n in (10, 20, 30) if n <= cfg.n_max] or [cfg.n_max]
    if ctx.n is not None:
        ns = [ctx.n]
    ctx.records(max(ns))
    probes = asy.star_probes(p, cfg.system.intervals, cfg.probe_radii)
    pred = hpm.delta_prediction(res, probes)
    rows = []
    worst = 0.0
    for n in ns:
        rec = ctx.records(n)[n]
        sk = ctx.second_kind(n)
        ap = hpm.build_approximant(h, rec)
        for j in range(p):
            for i, z in enumerate(probes):
                r = hpm.remainder(h, rec, j, complex(z), ap, sk)
                mag = abs(r.value)
                worst = max(worst, float(r.discrepancy))
                nth = float(mp.exp(mp.log(mag) / n))
                rows.append([n, j, i, _f(z.real), _f(z.imag), _dec(mag, ctx.prec), _f(nth), _f(math.exp(pred[i])),
                             _dec(r.discrepancy, ctx.prec)])
    out.table("remainders.csv", ["n", "j", "probe", "re", "im", "abs_delta", "nth_root", "prediction", "discrepancy"], rows)
    out.summary = {"degrees": ns, "max_discrepancy": worst}


def stage_figures(ctx: Context, out: StageWriter) -> None:
    degrees = [ctx.n] if ctx.n is not None else list(FIGURE_DEGREES)
    recs = ctx.records(max(degrees))
    rows = []
    for n in degrees:
        for z in recs[n].star_zeros:
            rows.append([n, _f(mp.re(z)), _f(mp.im(z))])
    out.table("star_zeros.csv", ["n", "re", "im"], rows)
    out.summary = {"degrees": degrees}


RUNNERS = {
    "polys": stage_polys,
    "recurrence": stage_recurrence,
    "second-kind": stage_second_kind,
    "equilibrium": stage_equilibrium,
    "asymptotics": stage_asymptotics,
    "hp": stage_hp,
    "figures": stage_figures,
}


def run_stage(ctx: Context, stage: str, root: Path) -> dict:
    """Run one stage; failures become an error record in its manifest."""
    out = StageWriter(root, stage, ctx)
    try:
        with mp.workprec(ctx.prec):
            RUNNERS[stage](ctx, out)
    except Exception as exc:  # noqa: BLE001 - recorded, then reported by the caller
        return out.manifest(
            "error", {"type": type(exc).__name__, "message": str(exc), "where": traceback.format_exc(limit=3).splitlines()[-1]}
        )
    return out.manifest("ok")


def _resolve_config(arg: str) -> RunConfig:
    path = Path(arg)
    if not path.exists() and not arg.endswith(".toml"):
        path = shipped_config(arg)
    return load_config(path)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=argparse.SUPPRESS, help="TOML file or shipped config name (default example-p2)")
    common.add_argument("--n", type=int, default=argparse.SUPPRESS, help="single degree for polys/second-kind/hp/figures")
    common.add_argument("--n-max", type=int, default=argparse.SUPPRESS, help="override run.n_max")
    common.add_argument("--precision-bits", type=int, default=argparse.SUPPRESS, help="override run.precision_bits")
    common.add_argument("--grid", type=int, default=argparse.SUPPRESS, help="override run.grid (cells per component)")
    common.add_argument("--out", default=argparse.SUPPRESS, help="override run.out")
    common.add_argument("--stage", choices=STAGES + ("all",), default=argparse.SUPPRESS, help="stage to run")
    parser = argparse.ArgumentParser(prog="nikishin", description=__doc__.splitlines()[0], parents=[common])
    sub = parser.add_subparsers(dest="command")
    for name in STAGES + ("all",):
        sub.add_parser(name, parents=[common], help=f"run the {name} stage" if name != "all" else "run every stage")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = vars(parser.parse_args(argv))
    stage = args.get("stage") or args.get("command")
    if stage is None:
        parser.error("choose a stage (subcommand or --stage)")
    try:
        cfg = _resolve_config(args.get("config", "example-p2"))
        cfg = cfg.replace(n_max=args.get("n_max"), precision_bits=args.get("precision_bits"), grid=args.get("grid"),
                          out=args.get("out"))
    except (ConfigError, InvalidSystem) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    ctx = Context(cfg, args.get("n"))
    root = Path(cfg.out) / cfg.digest()
    stages = STAGES if stage == "all" else (stage,)
    status = 0
    for s in stages:
        man = run_stage(ctx, s, root)
        line = f"{s}: {man['status']} -> {root / s}"
        if man["status"] != "ok":
            line += f" ({man['error']['type']}: {man['error']['message']})"
            status = 1
        print(line)
        if status and stage != "all":
            break
    return status


if __name__ == "__main__":
    sys.exit(main())
