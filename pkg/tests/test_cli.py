import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from folsys.cli import (ScenarioConfig, build_bundle, compile_expression,
                        main, run)
from folsys.errors import ConfigError


def write_config(path: Path, **overrides) -> Path:
    cfg = {
        "model": "hamilton_jacobi",
        "params": {"n": 2, "hamiltonian": "sum_cos"},
        "integration": {"t0": 0.0, "t1": 2.0, "step": 1e-3},
        "checks": ["leaf_drift", "superposition"],
        "seed": 42,
    }
    cfg.update(overrides)
    path.write_text(json.dumps(cfg))
    return path


# --- expression grammar --------------------------------------------------------

def test_expression_arithmetic_and_functions():
    fn = compile_expression("1 + 0.1*sin(t) - I/2 + pow(t, 2)", ("t", "I"))
    t, I = 0.7, 1.4
    assert fn({"t": t, "I": I}) == pytest.approx(1 + 0.1 * np.sin(t) - I / 2 + t ** 2)
    fn2 = compile_expression("cos(t*P1) + P2**2", ("t", "P1", "P2"))
    assert fn2({"t": 0.5, "P1": 1.0, "P2": 2.0}) == pytest.approx(np.cos(0.5) + 4.0)


def test_expression_rejects_unsafe_syntax():
    for bad in ("__import__('os')", "t.__class__", "exp(t)", "x", "[1,2]",
                "lambda: 1", "'s'"):
        with pytest.raises(ConfigError):
            compile_expression(bad, ("t",))


# --- config validation -----------------------------------------------------------

def test_config_rejects_bad_step_and_horizon():
    with pytest.raises(ConfigError):
        ScenarioConfig.from_dict({"model": "riccati",
                                  "integration": {"step": -1.0},
                                  "checks": ["superposition"]})
    with pytest.raises(ConfigError):
        ScenarioConfig.from_dict({"model": "riccati",
                                  "integration": {"t0": 1.0, "t1": 0.0}})


def test_config_rejects_unknown_model_and_check():
    with pytest.raises(ConfigError):
        ScenarioConfig.from_dict({"model": "pendulum"})
    with pytest.raises(ConfigError):
        ScenarioConfig.from_dict({"model": "riccati", "checks": ["entropy"]})


def test_build_bundle_expression_models():
    cfg = ScenarioConfig.from_dict({
        "model": "ermakov",
        "params": {"omega2": "1+0.1*sin(t)", "c1": 1.0, "c2": 1.0},
    })
    bundle = build_bundle(cfg)
    assert bundle.name == "ermakov"
    cfg2 = ScenarioConfig.from_dict({
        "model": "hamilton_jacobi",
        "params": {"n": 1, "hamiltonian": "cos(t*P1)"},
    })
    b2 = build_bundle(cfg2)
    assert b2.spec.H(0.5, np.array([1.2])) == pytest.approx(np.cos(0.6))


# --- running scenarios -----------------------------------------------------------

def test_run_all_checks_pass(tmp_path):
    cfg = ScenarioConfig.from_dict({
        "model": "hamilton_jacobi",
        "params": {"n": 2},
        "integration": {"t0": 0.0, "t1": 2.0, "step": 1e-3},
        "checks": ["foliated", "leaf_drift", "superposition", "automorphic",
                   "poisson"],
        "seed": 42,
        "out": str(tmp_path / "out"),
    })
    reports, files = run(cfg)
    assert len(reports) >= 12
    assert all(r.status == "pass" for r in reports)
    assert Path(files["trajectory"]).exists()
    header = Path(files["trajectory"]).read_text().splitlines()[0]
    assert header == "t,x1,x2,x3,x4"


def test_run_rejects_unsupported_check(tmp_path):
    cfg = ScenarioConfig.from_dict({
        "model": "riccati", "checks": ["spectrum"], "out": str(tmp_path),
    })
    with pytest.raises(ConfigError):
        run(cfg)


def test_cli_exit_codes_and_reports(tmp_path):
    cfg_path = write_config(tmp_path / "ok.json",
                            checks=["leaf_drift", "spectrum"], model="lax")
    out = tmp_path / "out-ok"
    rc = main(["--config", str(cfg_path), "--out", str(out), "--format", "csv"])
    assert rc == 0
    rows = json.loads((out / "report.json").read_text())
    assert all(r["status"] == "pass" for r in rows)
    assert (out / "report.csv").exists()

    # a coarse step makes the conserved-quantity drift visibly fail
    bad_path = write_config(tmp_path / "bad.json", model="ermakov",
                            params={"omega2": "1+0.1*sin(t)"},
                            integration={"t0": 0.0, "t1": 5.0, "step": 0.5},
                            checks=["lewis"])
    rc = main(["--config", str(bad_path), "--out", str(tmp_path / "out-bad")])
    assert rc == 1
    rows = json.loads((tmp_path / "out-bad" / "report.json").read_text())
    assert any(r["status"] == "fail" for r in rows)


def test_cli_config_error_exit_code(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text(json.dumps({"model": "riccati",
                                "integration": {"step": -1},
                                "checks": ["superposition"]}))
    rc = main(["--config", str(path), "--out", str(tmp_path / "o")])
    assert rc == 2


def test_cli_ermakov_uncoupled_automorphic(tmp_path):
    cfg = ScenarioConfig.from_dict({
        "model": "ermakov",
        "params": {"omega2": "1+0.1*sin(t)", "c1": 0.0, "c2": 0.0},
        "integration": {"t0": 0.0, "t1": 2.0, "step": 1e-3},
        "checks": ["automorphic", "lewis"],
        "out": str(tmp_path / "out"),
        "initial_state": [1.0, 1.2, 0.3, -0.2],
    })
    reports, _ = run(cfg)
    assert all(r.status == "pass" for r in reports)


def test_report_render_empty(tmp_path, capsys):
    from folsys.cli import report_render
    written = report_render([], tmp_path)
    assert json.loads(Path(written["report_json"]).read_text()) == []
    out = capsys.readouterr().out.strip().splitlines()
    assert len(out) == 1  # header only


def test_cli_list_models(capsys):
    assert main(["--list-models"]) == 0
    out = capsys.readouterr().out.split()
    assert out == ["riccati", "hamilton_jacobi", "lax", "ermakov"]


def test_cli_subprocess_list_models():
    proc = subprocess.run([sys.executable, "-m", "folsys.cli", "--list-models"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    names = proc.stdout.split()
    assert "riccati" in names and "ermakov" in names


def test_repeated_runs_identical_reports(tmp_path):
    cfg_path = write_config(tmp_path / "cfg.json")
    outs = []
    for sub in ("a", "b"):
        out = tmp_path / sub
        rc = main(["--config", str(cfg_path), "--out", str(out)])
        assert rc == 0
        outs.append(out)
    rows_a = json.loads((outs[0] / "report.json").read_text())
    rows_b = json.loads((outs[1] / "report.json").read_text())
    # runtime_s is a wall-clock measurement; every reported value must agree
    # bitwise between runs
    for ra, rb in zip(rows_a, rows_b):
        ra.pop("runtime_s")
        rb.pop("runtime_s")
    assert rows_a == rows_b
    assert (outs[0] / "trajectory.csv").read_bytes() == \
        (outs[1] / "trajectory.csv").read_bytes()
