import json
import subprocess
import sys

import pytest

from nvfiber.cli import main

FAST_DOC = {
    "system": {"delta": 10.0, "nu": 10.0},
    "pulses": {"omega_m": 1.0, "t0": 15.0, "t1": 9.0, "tp": 5.0, "T": 20.0},
    "grid": {"dt": 0.01, "sample_stride": 500},
}


@pytest.fixture
def fast_config(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps(FAST_DOC))
    return str(path)


@pytest.fixture
def fig3_config(tmp_path):
    doc = dict(FAST_DOC)
    doc["pulses"] = {"omega_m": 1.0, "t0": 150.0, "t1": 90.0, "tp": 50.0, "T": 200.0}
    doc["grid"] = {"dt": 0.01, "sample_stride": 2000}
    path = tmp_path / "fig3.json"
    path.write_text(json.dumps(doc))
    return str(path)


def test_prepare_w_summary_reports_fidelity(fig3_config, capsys):
    assert main(["prepare-w", "--config", fig3_config]) == 0
    out = capsys.readouterr().out
    assert "fidelity=" in out and "basis_dimension=8" in out
    fidelity = float(out.split("fidelity=")[1].split()[0])
    assert fidelity >= 0.98


def test_missing_config_field_exits_one(tmp_path, capsys):
    doc = {"system": {"delta": 10.0, "nu": 10.0},
           "pulses": {"omega_m": 1.0, "t0": 15.0, "t1": 9.0, "T": 20.0}}
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(doc))
    assert main(["clone", "--config", str(path)]) == 1
    assert "pulses.tp" in capsys.readouterr().err


def test_dark_state_prints_amplitudes_and_residual(fig3_config, capsys):
    assert main(["dark-state", "--config", fig3_config, "--time", "150"]) == 0
    out = capsys.readouterr().out
    assert "|fgg>|000>|0>_f" in out
    residual = float(out.split("|H(t) psi| = ")[1])
    assert residual <= 1e-12


def test_figure_preset_writes_csv(tmp_path, capsys):
    out = tmp_path / "fig3c.csv"
    # coarse step keeps this a contract test, not a physics run
    rc = main(["figure", "3c", "--out", str(out), "--set", "grid.dt=0.05",
               "--set", "pulses.T=40", "--set", "pulses.t0=30",
               "--set", "pulses.t1=18", "--workers", "2"])
    assert rc == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "pulses.tp,fidelity"
    assert len(lines) == 1 + 11  # header + preset grid rows


def test_clone_delta_phase_flag(fast_config, capsys):
    assert main(["clone", "--config", fast_config, "--delta-phase", "1.0"]) == 0
    out = capsys.readouterr().out
    assert "per_copy_fidelities:" in out


def test_sweep_subcommand(tmp_path, capsys):
    doc = dict(FAST_DOC)
    doc["sweep"] = {"param": "system.nu", "values": [2.0, 8.0]}
    doc["output"] = {"path": str(tmp_path / "sweep.csv")}
    path = tmp_path / "sweep.json"
    path.write_text(json.dumps(doc))
    assert main(["sweep", "--config", str(path)]) == 0
    assert "rows=2" in capsys.readouterr().out
    assert (tmp_path / "sweep.csv").exists()


def test_numerical_failure_exits_two(tmp_path, capsys):
    doc = dict(FAST_DOC)
    doc["grid"] = {"dt": 2.0, "sample_stride": 1}
    path = tmp_path / "stiff.json"
    path.write_text(json.dumps(doc))
    assert main(["prepare-w", "--config", str(path)]) == 2
    assert "reduce dt" in capsys.readouterr().err


def test_set_override_applied(fast_config, capsys):
    assert main(["prepare-w", "--config", fast_config, "--set", "system.nu=2.0",
                 "-v"]) == 0
    captured = capsys.readouterr()
    assert "override system.nu = 2.0" in captured.err


def test_unknown_override_path_exits_one(fast_config, capsys):
    assert main(["prepare-w", "--config", fast_config, "--set", "system.zz=1"]) == 1
    assert "system.zz" in capsys.readouterr().err


def test_version_and_help_run_as_subprocess():
    out = subprocess.run([sys.executable, "-m", "nvfiber.cli", "--version"],
                         capture_output=True, text=True)
    assert out.returncode == 0 and "nvfiber" in out.stdout
    help_out = subprocess.run([sys.executable, "-m", "nvfiber.cli", "--help"],
                              capture_output=True, text=True)
    assert help_out.returncode == 0
    for sub in ("dark-state", "prepare-w", "clone", "sweep", "figure"):
        assert sub in help_out.stdout


def test_identical_invocations_identical_outputs(tmp_path):
    doc = dict(FAST_DOC)
    doc["sweep"] = {"param": "pulses.omega_m", "values": [0.5, 1.0, 1.5]}
    path = tmp_path / "det.json"
    path.write_text(json.dumps(doc))
    outs = []
    for name in ("a.csv", "b.csv"):
        out = tmp_path / name
        assert main(["sweep", "--config", str(path), "--out", str(out)]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
