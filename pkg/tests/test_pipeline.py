import json
from pathlib import Path

import numpy as np
import pytest

from twophase import cli
from twophase.errors import ConfigurationError
from twophase.pipeline import EXIT_CODES, RunConfig, run, terminal_value, time_profile

CONFIGS = Path(__file__).resolve().parents[1] / "demos" / "configs"

STATIONARY = {
    "law": {"b": 0.0, "c": 1.0, "A": 0.0, "B": 1.0},
    "interface": {"family": "constant", "T": 1.0},
    "data": {"u0": {"family": "constant", "base": 1.5}, "uT": {"family": "constant", "base": 0.5}},
    "nodes": 16,
    "oracle": {"n_space": 64, "n_time": 64},
}


def write_config(tmp_path, **over) -> Path:
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps({**STATIONARY, **over}))
    return p


@pytest.mark.parametrize("bad", [{"nodes": 7}, {"colour": 1}, {"terminal": "late"},
                                 {"manufactured": "nope"}])
def test_config_rejects(bad):
    with pytest.raises(ConfigurationError):
        RunConfig.from_dict({**STATIONARY, **bad})
    with pytest.raises(ConfigurationError):
        RunConfig.from_dict({"interface": STATIONARY["interface"]})


def test_terminal_value_modes():
    cfg = RunConfig.from_dict(STATIONARY)
    assert terminal_value(cfg) == pytest.approx(0.5)
    assert terminal_value(RunConfig.from_dict({**STATIONARY, "terminal": "free"})) is None
    assert terminal_value(RunConfig.from_dict({**STATIONARY, "terminal": 0.4})) == 0.4


@pytest.mark.parametrize("fam", [{"family": "constant", "base": 2.0},
                                 {"family": "exponential", "amp": 1.0, "rate": 2.0},
                                 {"family": "sine", "amp": 1.0, "rate": 3.0},
                                 {"family": "polynomial", "coefficients": [1.0, 2.0, 3.0]}])
def test_time_profile_derivatives(fam):
    g, dg = time_profile(fam)
    t = np.array([0.3, 0.7])
    fd = (g(t + 1e-6) - g(t - 1e-6)) / 2e-6
    assert np.allclose(dg(t), fd, atol=1e-6)
    with pytest.raises(ConfigurationError):
        time_profile({"family": "triangle"})


def test_stationary_run(tmp_path):
    res = run(RunConfig.from_dict(STATIONARY), tmp_path / "out")
    assert res.status == 0 and res.stage == "ok"
    manifest = json.loads((tmp_path / "out" / "manifest.json").read_text())
    assert {"m.csv", "solve_report.json", "solution/interface.csv", "verification.json"} <= set(manifest["files"])
    assert manifest["stages"]["solve"]["residual"] < 1e-12


def test_manufactured_run_recovers_density(tmp_path):
    cfg = RunConfig.load(CONFIGS / "manufactured.json")
    cfg.nodes = 64
    res = run(cfg, tmp_path)
    assert res.status == 0
    assert res.manifest["stages"]["solve"]["recovery_error"] < 1e-6


def test_phase_exit_maps_to_reconstruct_code(tmp_path):
    cfg = RunConfig.from_dict({**STATIONARY, "m0": 0.5, "terminal": 1.5})
    res = run(cfg, tmp_path)
    assert res.status == EXIT_CODES["reconstruct"]
    err = json.loads((tmp_path / "error.json").read_text())
    assert err["kind"] == "PhaseExitError" and "time" in err


def test_validation_failure_code(tmp_path):
    bad = {**STATIONARY, "data": {"u0": {"family": "constant", "base": 0.9},
                                  "uT": {"family": "constant", "base": 0.5}}}
    assert run(RunConfig.from_dict(bad), tmp_path).status == EXIT_CODES["validation"]


def test_cli_subcommands(tmp_path, capsys):
    cfg = write_config(tmp_path)
    out = tmp_path / "cli"
    assert cli.main(["run", "--config", str(cfg), "--out", str(out), "--nodes", "16", "--lambda", "1e-12"]) == 0
    assert cli.main(["solve-abel", "--config", str(cfg), "--out", str(out / "s"), "--nodes", "8"]) == 0
    assert (out / "s" / "m.csv").exists()
    assert cli.main(["reconstruct", "--config", str(cfg), "--out", str(out / "s")]) == 0
    assert cli.main(["verify", "--config", str(cfg), "--out", str(out / "s")]) == 0
    assert cli.main(["dtn", "--config", str(cfg), "--out", str(out / "d"), "--nodes", "16"]) == 0
    assert sorted(p.name for p in (out / "d").iterdir()) == ["flux_minus.csv", "flux_plus.csv"]
    assert cli.main(["compare-oracle", "--config", str(cfg), "--out", str(out / "c")]) == 0
    assert json.loads((out / "c" / "oracle_comparison.json").read_text())["plus"] == 0.0
    capsys.readouterr()


def test_cli_error_codes(tmp_path, capsys):
    cfg = write_config(tmp_path, data={"u0": {"family": "constant", "base": 1.0},
                                       "uT": {"family": "constant", "base": 0.5}},
                       nodes=64, oracle={"n_space": 512, "n_time": 512},
                       thresholds={"entropy_rel": 1e-3})
    assert cli.main(["run", "--config", str(cfg), "--out", str(tmp_path / "a")]) == EXIT_CODES["validation"]
    assert cli.main(["run", "--config", str(cfg), "--out", str(tmp_path / "b"), "--no-strict"]) == 0
    broken = tmp_path / "broken.json"
    broken.write_text(json.dumps({"law": STATIONARY["law"]}))
    assert cli.main(["solve-abel", "--config", str(broken)]) == EXIT_CODES["config"]
    out = capsys.readouterr().out
    assert "ConfigurationError" in out
    with pytest.raises(SystemExit):
        cli.main(["run"])


def test_advancing_interface_fails_verification(tmp_path):
    cfg = RunConfig.load(CONFIGS / "advancing.json")
    cfg.nodes, cfg.oracle_space, cfg.oracle_time = 64, 256, 256
    res = run(cfg, tmp_path)
    assert res.status == EXIT_CODES["verify"]
    assert "interface_monotonicity" in res.manifest["stages"]["verify"]["failed"]
