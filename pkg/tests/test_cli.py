import csv
import hashlib
import json

import pytest

from nikishin.cli import main
from nikishin.config import ConfigError, load_config, parse_config, shipped_config


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))[1:]


def _run(tmp_path, *args):
    return main([*args, "--out", str(tmp_path)])


def _stage_dir(tmp_path, stage):
    (d,) = [p for p in tmp_path.iterdir() if p.is_dir()]
    return d / stage


def test_polys_n30(tmp_path):
    assert _run(tmp_path, "polys", "--config", "example-p2", "--n", "30") == 0
    d = _stage_dir(tmp_path, "polys")
    assert len(_rows(d / "zeros.csv")) == 30
    assert len(_rows(d / "segment_roots.csv")) == 10
    man = json.loads((d / "manifest.json").read_text())
    assert man["status"] == "ok"
    for f in man["files"]:
        data = (d / f["name"]).read_bytes()
        assert hashlib.sha256(data).hexdigest() == f["sha256"]
        assert b"\r\n" in data


def test_rerun_is_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["recurrence", "--config", "example-p2", "--n-max", "20", "--out", str(a)]) == 0
    assert main(["recurrence", "--config", "example-p2", "--n-max", "20", "--out", str(b)]) == 0
    da, db = _stage_dir(a, "recurrence"), _stage_dir(b, "recurrence")
    for f in sorted(da.iterdir()):
        assert f.read_bytes() == (db / f.name).read_bytes()


def test_legendre_equilibrium(tmp_path):
    assert _run(tmp_path, "--stage", "equilibrium", "--config", "legendre") == 0
    summary = json.loads((_stage_dir(tmp_path, "equilibrium") / "summary.json").read_text())
    assert summary["w"][0] == pytest.approx(1.3862943611198906, abs=1e-3)


def test_missing_density_kind_names_field(tmp_path, capsys):
    cfg = tmp_path / "bad.toml"
    cfg.write_text('[system]\np = 1\n[[system.measures]]\ninterval = ["0", "1"]\ndensity = { gamma = "1" }\n')
    assert _run(tmp_path, "polys", "--config", str(cfg)) == 2
    assert "system.measures[0].density.kind: missing field" in capsys.readouterr().err


def test_toml_syntax_error_reports_position(tmp_path):
    cfg = tmp_path / "broken.toml"
    cfg.write_text("[system]\np = = 1\n")
    with pytest.raises(ConfigError, match="line 2"):
        load_config(cfg)


def test_invalid_system_is_config_error(tmp_path, capsys):
    cfg = tmp_path / "overlap.toml"
    cfg.write_text(
        '[system]\np = 2\n'
        '[[system.measures]]\ninterval = ["0", "1"]\ndensity = { kind = "power", gamma = "0" }\n'
        '[[system.measures]]\ninterval = ["-1", "0"]\ndensity = { kind = "power", gamma = "0" }\n'
    )
    assert _run(tmp_path, "polys", "--config", str(cfg)) == 2
    assert "origin" in capsys.readouterr().err


def test_config_hash_stable_and_sensitive():
    a = load_config(shipped_config("example-p2"))
    b = load_config(shipped_config("example-p2"))
    assert a.digest() == b.digest()
    assert a.replace(grid=800).digest() != a.digest()


def test_star_coordinates_convert_exponent():
    cfg = load_config(shipped_config("example-p2-star"))
    assert all(d.gamma == 0 for d in cfg.system.densities)


def test_run_field_checks():
    base = {
        "system": {"p": 1, "measures": [{"interval": ["0", "1"], "density": {"kind": "power", "gamma": "0"}}]},
    }
    with pytest.raises(ConfigError, match="run.precision_bits"):
        parse_config({**base, "run": {"precision_bits": 32}})
    with pytest.raises(ConfigError, match="unknown field"):
        parse_config({**base, "run": {"speed": 3}})


def test_no_stage_is_usage_error():
    with pytest.raises(SystemExit):
        main([])
