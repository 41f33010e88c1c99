import json

import numpy as np
import pytest

from vortexfloquet.bifurcation import shear_rotation_matrix, write_family_csv
from vortexfloquet.cli import parse_grid, run
from vortexfloquet.config import RunConfig


def _manifest(path):
    return json.loads((path / "manifest.json").read_text())


def test_parse_grid():
    assert parse_grid("0.05:0.2:0.025") == (0.05, 0.075, 0.1, 0.125, 0.15, 0.175, 0.2)
    assert parse_grid("0.1, 0.2") == (0.1, 0.2)


def test_floquet_triangle(tmp_path, capsys):
    assert run(["floquet", "--triangle", "1", "2", "3", "--out", str(tmp_path)]) == 0
    rows = np.loadtxt(tmp_path / "eigenvalues.csv", delimiter=",", skiprows=1)
    ev = rows[:, 1] + 1j * rows[:, 2]
    for t in np.exp(np.array([1j, -1j]) * np.pi * np.sqrt(11 / 3)):
        assert np.min(np.abs(ev - t)) < 1e-6
    assert "LRE_stable" in _manifest(tmp_path)["results"]["labels"]


def test_manifest_hashes_every_output(tmp_path):
    import hashlib

    assert run(["equilibria", "--rhombus", "1.1", "--out", str(tmp_path)]) == 0
    man = _manifest(tmp_path)
    names = {o["path"] for o in man["outputs"]}
    assert names == {p.name for p in tmp_path.iterdir()} - {"manifest.json"}
    for o in man["outputs"]:
        assert hashlib.sha256((tmp_path / o["path"]).read_bytes()).hexdigest() == o["sha256"]
    assert RunConfig.from_text(man["config"]).equilibrium.y == 1.1


def test_serial_runs_are_byte_identical(tmp_path):
    args = ["continue", "--domain", "unit-disc", "--pair", "1", "1", "--r", "0.05,0.1", "--jobs", "1"]
    a, b = tmp_path / "a", tmp_path / "b"
    assert run(args + ["--out", str(a)]) == 0
    assert run(args + ["--out", str(b)]) == 0
    for name in ("family.csv", "family_u0.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    hashes = lambda d: [o["sha256"] for o in _manifest(d)["outputs"]]
    assert hashes(a) == hashes(b)


def test_csv_uses_17_significant_digits(tmp_path):
    assert run(["equilibria", "--pair", "1", "2", "--out", str(tmp_path)]) == 0
    row = (tmp_path / "equilibrium.csv").read_text().splitlines()[1].split(",")
    assert float(row[2]) == 3.0 / np.pi  # nu = Gamma/(pi D^2), exact round trip


def test_output_dir_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("VORTEXFLOQUET_OUTDIR", str(tmp_path / "env"))
    assert run(["equilibria", "--pair", "1", "1"]) == 0
    assert (tmp_path / "env" / "manifest.json").exists()


def test_config_file_with_flag_override(tmp_path):
    cfg = tmp_path / "run.ini"
    cfg.write_text("[equilibrium]\nkind = triangle\ngamma = 1, 2, 3\n")
    out = tmp_path / "out"
    assert run(["equilibria", "--config", str(cfg), "--out", str(out)]) == 0
    assert _manifest(out)["results"]["L"] == 11.0
    assert run(["equilibria", "--config", str(cfg), "--pair", "1", "1", "--out", str(out)]) == 0
    assert _manifest(out)["results"]["L"] == 1.0


def test_robin_conformal(tmp_path):
    assert run(["robin", "--domain", "conformal", "--coeffs", "0,1,0.1", "--out", str(tmp_path)]) == 0
    text = (tmp_path / "critical_points.csv").read_text()
    assert "min" in text


def test_simulate_writes_trajectory_and_plot(tmp_path):
    assert run(["simulate", "--domain", "unit-disc", "--pair", "1", "1", "--scale", "0.1", "--T", "1",
                "--samples", "5", "--plot", "--out", str(tmp_path)]) == 0
    rows = np.loadtxt(tmp_path / "trajectory.csv", delimiter=",", skiprows=1)
    assert rows.shape == (5, 6)
    assert np.ptp(rows[:, -1]) < 1e-9
    compile((tmp_path / "plot_trajectory.py").read_text(), "plot", "exec")


def test_bifurcation_fit_from_csv(tmp_path):
    rs = [0.0, 0.2, 0.1, 0.05, 0.025]
    path = tmp_path / "m.csv"
    write_family_csv(path, rs, [np.diag([1 + r * r, 1 - r * r]) for r in rs])
    out = tmp_path / "o"
    assert run(["bifurcation", "fit", "--matrices", str(path), "--lam0", "1", "--exponent", "2",
                "--out", str(out)]) == 0
    assert _manifest(out)["results"]["accepted"] is True
    write_family_csv(path, rs, [shear_rotation_matrix(r) for r in rs])
    assert run(["bifurcation", "fit", "--matrices", str(path), "--out", str(out)]) == 0
    assert _manifest(out)["results"]["accepted"] is False


def test_bifurcation_selftest(tmp_path):
    assert run(["bifurcation", "selftest", "--out", str(tmp_path)]) == 0


def test_selftest(tmp_path):
    assert run(["selftest", "--out", str(tmp_path)]) == 0
    assert _manifest(tmp_path)["results"]["failed"] == []


@pytest.mark.parametrize("argv", [
    ["floquet", "--pair", "1", "-1"],
    ["equilibria", "--rhombus", "0.3"],
    ["continue", "--domain", "unit-disc", "--pair", "1", "1", "--r", "0.2,0.1"],
    ["robin", "--domain", "whole-plane"],
    ["robin", "--domain", "conformal"],
    ["bifurcation", "fit"],
])
def test_invalid_input_exit_code(tmp_path, argv):
    assert run(argv + ["--out", str(tmp_path)]) == 2
    err = json.loads((tmp_path / "error.json").read_text())
    assert err["error_class"] in {"invalid_input", "invalid_config", "precondition_failed"}


def test_unknown_subcommand_exit_code():
    assert run(["nonsense"]) == 2


def test_numerical_failure_exit_code(tmp_path):
    assert run(["continue", "--domain", "unit-disc", "--triangle", "1", "1", "-0.5", "--r", "0.05",
                "--out", str(tmp_path)]) in (2, 3)
    cfg = tmp_path / "run.ini"
    cfg.write_text("[equilibrium]\nkind = pair\ngamma = 1, 1\n[grid]\nr = 0.05, 1.3\n"
                   "[domain]\nkind = unit-disc\n")
    out = tmp_path / "o"
    # 1.3 keeps r * z0 inside the disc but Newton leaves it on the jump from 0.05
    code = run(["continue", "--config", str(cfg), "--out", str(out)])
    assert code == 3
    err = json.loads((out / "error.json").read_text())
    assert err["partial"] is True
    assert (out / "manifest.json").exists()
