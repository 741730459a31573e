import json
import math

import pytest

from scarlab import cli
from scarlab.errors import ToleranceNotMet
from scarlab.report import Report, emit_report, read_report


def run(tmp_path, command, cfg_text="", extra=()):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(cfg_text)
    out = tmp_path / command
    code = cli.main([command, "--config", str(cfg), "--out", str(out), *extra])
    return code, out


def test_transform_check(tmp_path):
    code, out = run(tmp_path, "transform-check", "n_samples = 16\n")
    assert code == 0
    man, header, rows = read_report(out)
    assert header == cli.TRANSFORM_COLUMNS and len(rows) == 16
    assert man["summary"]["max_model_rel"] < 1e-8 and man["summary"]["max_windowed_rel"] < 1e-6
    assert man["command"] == "transform-check" and man["status"] == "ok"


def test_phase_check(tmp_path):
    code, out = run(tmp_path, "phase-check", "n_t = 20\n")
    assert code == 0
    man, header, rows = read_report(out)
    assert header[0] == "t" and len(rows) == 20
    assert man["summary"]["max_phase_err"] <= 1e-12


def test_kernel_eval_variants(tmp_path):
    for variant in ("full_kappa", "defect_kappa", "spectral_component"):
        code, out = run(tmp_path, "kernel-eval", f"variant = {variant}\nt = 0.01\n")
        assert code == 0
        man, header, rows = read_report(out)
        assert header == ["x", "t", "theta", "re", "im", "err_est"] and len(rows) == 1
        assert math.isfinite(float(rows[0][3]))


def test_mass(tmp_path):
    code, out = run(tmp_path, "mass", "n_validate = 0\ngrid_tau = 16\ngrid_y = 32\ngrid_theta = 16\n")
    assert code == 0
    man, header, rows = read_report(out)
    assert header == ["region", "tau", "theta", "mass"]
    s = man["summary"]
    assert 0 < s["ratio"] < 1
    assert s["collar_mass_log_r"] == pytest.approx(s["collar_mass"] * math.log(144), rel=1e-12)


def test_defect(tmp_path):
    code, out = run(tmp_path, "defect", "grid_tau = 32\ngrid_y = 64\ngrid_theta = 16\n")
    assert code == 0
    man, _, _ = read_report(out)
    assert man["summary"]["route_gap"] <= 0.05
    assert man["summary"]["narrow_window"]["ratio"] >= 100


def test_collar_injectivity(tmp_path):
    r = 2 * math.pi * 240 / 3.057141838961996
    code, out = run(tmp_path, "collar-injectivity", f"group = octagon\nr = {r!r}\npairs = 500\n")
    assert code == 0
    man, header, rows = read_report(out)
    assert header == ["key", "value"]
    assert man["summary"]["total_violations"] == 0


def test_collar_injectivity_violation_exit_code(tmp_path):
    g = tmp_path / "shift.txt"
    g.write_text(f"kind=cocompact l_xi=50 axis_word=a diameter=1\n{math.exp(25)} 0 0 {math.exp(-25)}\n1 0.5 0 1\n")
    code, out = run(tmp_path, "collar-injectivity", f"group = {g}\npairs = 100\n")
    assert code == cli.EXIT_INVARIANT
    man, _, _ = read_report(out)
    assert man["status"] == "violation" and man["summary"]["total_violations"] > 0


def test_dilute(tmp_path):
    code, out = run(tmp_path, "dilute", "grid_tau = 16\ngrid_y = 32\ngrid_theta = 16\n")
    assert code == 0
    man, header, rows = read_report(out)
    assert man["summary"]["delta2"] == 1 / 220
    assert len(rows) == 5 and all(float(r[3]) <= 1 + 1e-12 for r in rows)


def test_bad_config_exit_code(tmp_path, capsys):
    code, _ = run(tmp_path, "phase-check", "bogus = 1\n")
    assert code == cli.EXIT_CONFIG
    assert "line 1" in capsys.readouterr().err
    code, _ = run(tmp_path, "phase-check", "r = 148\n")
    assert code == cli.EXIT_CONFIG
    assert cli.main(["phase-check", "--config", str(tmp_path / "missing.cfg")]) == cli.EXIT_CONFIG
    code, _ = run(tmp_path, "phase-check", "", ["--threads", "zero"])
    assert code == cli.EXIT_CONFIG


def test_tolerance_exit_code(tmp_path, monkeypatch):
    def boom(cfg):
        raise ToleranceNotMet("no convergence", 0.0, 1.0)
    monkeypatch.setitem(cli.COMMANDS, "kernel-eval", boom)
    code, _ = run(tmp_path, "kernel-eval")
    assert code == cli.EXIT_TOL


def test_rerun_is_byte_identical(tmp_path):
    (tmp_path / "a").mkdir()
    (tmp_path / "b").mkdir()
    code1, out1 = run(tmp_path / "a", "transform-check", "n_samples = 12\n")
    code2, out2 = run(tmp_path / "b", "transform-check", "n_samples = 12\n")
    assert code1 == code2 == 0
    assert (out1 / "data.csv").read_bytes() == (out2 / "data.csv").read_bytes()
    m1 = json.loads((out1 / "manifest.json").read_text())
    m2 = json.loads((out2 / "manifest.json").read_text())
    m1.pop("wall_time_s"), m2.pop("wall_time_s")
    m1["config"].pop("out"), m2["config"].pop("out")
    assert m1 == m2


def test_report_roundtrip(tmp_path):
    rep = Report("x", {"a": 1}, {"v": 0.1, "flag": True, "z": 1 + 2j}, ["p", "q"], [(0.1, 3), (1e-300, -2)])
    emit_report(rep, tmp_path)
    man, header, rows = read_report(tmp_path)
    assert header == ["p", "q"]
    assert [float(rows[0][0]), int(rows[0][1])] == [0.1, 3]
    assert float(rows[1][0]) == 1e-300
    assert man["summary"] == {"v": 0.1, "flag": True, "z": [1.0, 2.0]}
    assert (tmp_path / "data.csv").read_bytes().count(b"\r") == 0
    with pytest.raises(ValueError):
        emit_report(Report("x", {}, {}, ["p"], [(1, 2)]), tmp_path / "bad")


def test_module_entry_point():
    import subprocess
    import sys
    res = subprocess.run([sys.executable, "-m", "scarlab", "--help"], capture_output=True, text=True)
    assert res.returncode == 0 and "transform-check" in res.stdout
