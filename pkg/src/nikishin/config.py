"""Run configuration: TOML parsing, validation and a stable content hash.

Numbers may be given as TOML numbers or as decimal strings; strings are
parsed at full working precision.

Example::

    [system]
    p = 2
    coordinates = "segment"        # or "star": |t|^gamma |dt| on the rays

    [[system.measures]]
    interval = ["0", "1"]
    density = { kind = "power", gamma = "2" }

    [[system.measures]]
    interval = ["-2", "-1"]
    density = { kind = "power", gamma = "2" }

    [run]
    precision_bits = 256
    quad_order = 96
    n_max = 36
    grid = 400
    probe_radii = ["1.5", "3"]
    out = "out"
"""

from __future__ import annotations

import hashlib
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

from mpmath import mp

from .measures import DensitySpec, InvalidSystem, StarSystem, star_to_segment, validate_system

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


class ConfigError(ValueError):
    """Malformed configuration file or field."""


_RUN_DEFAULTS = {
    "precision_bits": 256,
    "quad_order": 96,
    "n_max": 36,
    "grid": 400,
    "probe_radii": None,
    "out": "out",
}


@dataclass(frozen=True)
class RunConfig:
    """Validated run parameters."""

    system: StarSystem
    precision_bits: int = 256
    quad_order: int = 96
    n_max: int = 36
    grid: int = 400
    probe_radii: tuple | None = None
    out: str = "out"
    raw: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def p(self) -> int:
        return self.system.p

    def canonical(self) -> dict:
        """Normalized description used for hashing and manifests."""
        with mp.workprec(self.precision_bits):
            meas = []
            for (a, b), d in zip(self.system.intervals, self.system.densities):
                meas.append(
                    {
                        "interval": [_dec(a), _dec(b)],
                        "density": {
                            "kind": d.kind,
                            "gamma": _dec(d.gamma),
                            "alpha": _dec(d.alpha),
                            "beta": _dec(d.beta),
                            "abscissae": [_dec(x) for x in d.abscissae],
                            "values": [_dec(x) for x in d.values],
                        },
                    }
                )
        return {
            "system": {"p": self.p, "measures": meas},
            "run": {
                "precision_bits": self.precision_bits,
                "quad_order": self.quad_order,
                "n_max": self.n_max,
                "grid": self.grid,
                "probe_radii": None if self.probe_radii is None else [repr(float(r)) for r in self.probe_radii],
            },
        }

    def digest(self) -> str:
        blob = json.dumps(self.canonical(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def replace(self, **kw) -> "RunConfig":
        vals = {k: getattr(self, k) for k in ("system", "precision_bits", "quad_order", "n_max", "grid", "probe_radii", "out")}
        vals.update({k: v for k, v in kw.items() if v is not None})
        cfg = RunConfig(raw=self.raw, **vals)
        _check_run(cfg)
        return cfg


def _dec(x) -> str:
    return mp.nstr(mp.mpf(x), mp.dps, strip_zeros=True)


def _num(value, where: str):
    if isinstance(value, bool) or not isinstance(value, (int, float, str)):
        raise ConfigError(f"{where}: expected a number or decimal string, got {type(value).__name__}")
    try:
        return mp.mpf(value)
    except (ValueError, TypeError):
        raise ConfigError(f"{where}: cannot parse {value!r} as a number") from None


def _int(value, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{where}: expected an integer, got {value!r}")
    return value


def _density(raw, where: str) -> DensitySpec:
    if not isinstance(raw, dict):
        raise ConfigError(f"{where}: expected a table")
    if "kind" not in raw:
        raise ConfigError(f"{where}.kind: missing field")
    kind = raw["kind"]
    known = {"power": ("gamma",), "jacobi": ("alpha", "beta"), "tabulated": ("abscissae", "values")}
    if kind not in known:
        raise ConfigError(f"{where}.kind: unknown density kind {kind!r}")
    extra = set(raw) - {"kind", *known[kind]}
    if extra:
        raise ConfigError(f"{where}: unexpected field(s) {sorted(extra)} for kind {kind!r}")
    if kind == "power":
        return DensitySpec("power", gamma=_num(raw.get("gamma", 0), f"{where}.gamma"))
    if kind == "jacobi":
        return DensitySpec(
            "jacobi", alpha=_num(raw.get("alpha", 0), f"{where}.alpha"), beta=_num(raw.get("beta", 0), f"{where}.beta")
        )
    for key in ("abscissae", "values"):
        if not isinstance(raw.get(key), list):
            raise ConfigError(f"{where}.{key}: expected an array")
    xs = tuple(_num(v, f"{where}.abscissae[{i}]") for i, v in enumerate(raw["abscissae"]))
    ys = tuple(_num(v, f"{where}.values[{i}]") for i, v in enumerate(raw["values"]))
    return DensitySpec("tabulated", abscissae=xs, values=ys)


def _check_run(cfg: RunConfig) -> None:
    if cfg.precision_bits < 64:
        raise ConfigError("run.precision_bits: must be >= 64")
    if cfg.n_max < cfg.p:
        raise ConfigError(f"run.n_max: must be >= p = {cfg.p}")
    if cfg.grid < 64:
        raise ConfigError("run.grid: must be >= 64")
    if cfg.quad_order < 1:
        raise ConfigError("run.quad_order: must be >= 1")


def parse_config(data: dict) -> RunConfig:
    """Validate an already-decoded TOML document."""
    sysraw = data.get("system")
    if not isinstance(sysraw, dict):
        raise ConfigError("system: missing table")
    if "p" not in sysraw:
        raise ConfigError("system.p: missing field")
    p = _int(sysraw["p"], "system.p")
    coords = sysraw.get("coordinates", "segment")
    if coords not in ("segment", "star"):
        raise ConfigError(f"system.coordinates: expected 'segment' or 'star', got {coords!r}")
    measures = sysraw.get("measures")
    if not isinstance(measures, list):
        raise ConfigError("system.measures: missing array of tables")
    intervals, densities = [], []
    for i, m in enumerate(measures):
        where = f"system.measures[{i}]"
        if not isinstance(m, dict):
            raise ConfigError(f"{where}: expected a table")
        iv = m.get("interval")
        if not isinstance(iv, list) or len(iv) != 2:
            raise ConfigError(f"{where}.interval: expected [a, b]")
        ab = (_num(iv[0], f"{where}.interval[0]"), _num(iv[1], f"{where}.interval[1]"))
        if "density" not in m:
            raise ConfigError(f"{where}.density: missing field")
        dens = _density(m["density"], f"{where}.density")
        if coords == "star":
            if dens.kind != "power":
                raise ConfigError(f"{where}.density.kind: star coordinates support only the power kind")
            # interval stays in the segment variable; |t|^gamma |dt| on the
            # rays pushes forward to a multiple of |tau|^g dtau
            _, g = star_to_segment((0, 1), dens.gamma, p)
            dens = DensitySpec("power", gamma=g)
        intervals.append(ab)
        densities.append(dens)
    system = validate_system(p, intervals, densities)
    run = dict(_RUN_DEFAULTS)
    rawrun = data.get("run", {})
    if not isinstance(rawrun, dict):
        raise ConfigError("run: expected a table")
    unknown = set(rawrun) - set(_RUN_DEFAULTS)
    if unknown:
        raise ConfigError(f"run: unknown field(s) {sorted(unknown)}")
    run.update(rawrun)
    for key in ("precision_bits", "quad_order", "n_max", "grid"):
        run[key] = _int(run[key], f"run.{key}")
    radii = run["probe_radii"]
    if radii is not None:
        if not isinstance(radii, list) or not radii:
            raise ConfigError("run.probe_radii: expected a non-empty array")
        radii = tuple(float(_num(r, f"run.probe_radii[{i}]")) for i, r in enumerate(radii))
    if not isinstance(run["out"], str):
        raise ConfigError("run.out: expected a string")
    cfg = RunConfig(system, run["precision_bits"], run["quad_order"], run["n_max"], run["grid"], radii, run["out"], data)
    _check_run(cfg)
    return cfg


def load_config(path) -> RunConfig:
    """Read and validate a TOML run configuration.

    Decoding errors carry the line and column; field errors name the field.
    Violations of the system constraints surface as ``InvalidSystem``.
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"{path}: no such file")
    try:
        data = tomllib.loads(path.read_text(encoding="utf-8"))
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    try:
        return parse_config(data)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def shipped_config(name: str) -> Path:
    """Path of a configuration shipped with the package (e.g. ``"example-p2"``)."""
    path = Path(__file__).parent / "configs" / f"{name}.toml"
    if not path.is_file():
        raise ConfigError(f"no shipped configuration named {name!r}")
    return path


__all__ = ["ConfigError", "InvalidSystem", "RunConfig", "load_config", "parse_config", "shipped_config"]
