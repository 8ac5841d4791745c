import csv
import json

import numpy as np
import pytest

from ldgcore.cli import ConfigError, main, parse_config


def write_cfg(tmp_path, text, name="run.cfg"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


SMALL = """
# small PLUS run
n = 32
mu = 10
branch = PLUS
bound = -0.5
run_id = small
"""


def test_parse_config_keys():
    cfg = parse_config("n = 64\nbranch = minus\nsweep_values = 1, 10, 100\nsector = off\n")
    assert cfg.n == 64 and cfg.branch == "MINUS" and cfg.sweep_values == [1.0, 10.0, 100.0]
    assert cfg.sector is False
    assert parse_config("n = 64", ["mu=3"]).mu == 3.0


@pytest.mark.parametrize("text", ["n = abc", "unknown_key = 1", "n 32", "branch = SIDEWAYS"])
def test_parse_config_errors(text):
    with pytest.raises(ConfigError):
        parse_config(text).validate()


def test_verify_passes(capsys):
    assert main(["verify"]) == 0
    assert "FAIL" not in capsys.readouterr().out


def test_verify_mutation_fails(capsys):
    assert main(["verify", "--mutate", "eigen"]) == 1
    assert "eigenvalue oracle" in capsys.readouterr().out.split("failing checks:")[1]


def test_malformed_config_exit_2(tmp_path):
    assert main(["minimize", "--config", write_cfg(tmp_path, "n = = 3\n"), "--out", str(tmp_path)]) == 2
    assert main(["minimize", "--config", str(tmp_path / "missing.cfg"), "--out", str(tmp_path)]) == 2
    assert main(["minimize", "--set", "n=4", "--out", str(tmp_path)]) == 2
    assert main(["frobnicate"]) == 2


def test_empty_sweep_exit_2(tmp_path):
    cfg = write_cfg(tmp_path, SMALL + "sweep_parameter = b\n")
    assert main(["sweep", "--config", cfg, "--out", str(tmp_path / "s")]) == 2


def test_minimize_artifacts_and_determinism(tmp_path):
    cfg = write_cfg(tmp_path, SMALL)
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["minimize", "--config", cfg, "--out", str(a), "--seed", "3"]) == 0
    assert main(["minimize", "--config", cfg, "--out", str(b), "--seed", "3"]) == 0
    for name in ("checkpoint.npz", "energy.json", "defects.json", "field.csv",
                 "diagnostics.json", "trace.csv", "status.json"):
        assert (a / name).exists()
    assert (a / "field.csv").read_bytes() == (b / "field.csv").read_bytes()
    e = json.loads((a / "energy.json").read_text())
    assert e["schema_version"] == 1 and e["total"] < 24 * np.pi
    d = json.loads((a / "defects.json").read_text())
    assert d["ring_radius"] is not None and 0 < d["ring_radius"] < 1
    rows = list(csv.reader(open(a / "field.csv")))
    assert rows[0][0] == "# schema_version"
    assert rows[1][:5] == ["rho", "z", "u1", "u2", "u3"]


def test_analyze_checkpoint(tmp_path, capsys):
    cfg = write_cfg(tmp_path, SMALL)
    assert main(["minimize", "--config", cfg, "--out", str(tmp_path / "a")]) == 0
    capsys.readouterr()
    assert main(["analyze", "--checkpoint", str(tmp_path / "a" / "checkpoint.npz"),
                 "--out", str(tmp_path / "b")]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["ring_radius"] == pytest.approx(
        json.loads((tmp_path / "a" / "defects.json").read_text())["ring_radius"])
    assert main(["analyze", "--out", str(tmp_path / "c")]) == 2


def test_sweep_mu(tmp_path):
    cfg = write_cfg(tmp_path, SMALL + "sweep_parameter = mu\nsweep_values = 1, 10, 100\n")
    out = tmp_path / "s"
    assert main(["sweep", "--config", cfg, "--out", str(out)]) == 0
    rows = list(csv.reader(open(out / "summary.csv")))
    dist = [float(r[-1]) for r in rows[2:]]
    assert len(dist) == 3 and dist[0] > dist[1] > dist[2]


def test_tangent_export(tmp_path):
    assert main(["tangent", "--out", str(tmp_path), "--beta", "1.0"]) == 0
    prof = json.loads((tmp_path / "profiles.json").read_text())["profiles"]
    lam = next(p for p in prof if p["name"] == "lambda_plus")
    assert lam["B1_energy"] == pytest.approx(8 * np.pi, abs=1e-6)
    assert all(p["ode_residual"] < 1e-7 for p in prof)
    assert (tmp_path / "kappa_formulas.csv").exists()
