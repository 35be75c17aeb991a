import json
import subprocess
import sys

import numpy as np
import pytest

from lambda_eit import cli, io
from lambda_eit import spectroscopy as sp
from lambda_eit.config import bundled_config_path, parse_config_text
from lambda_eit.errors import FitError

BASE = bundled_config_path().read_text()
FAST = BASE.replace("points = 801", "points = 101")


@pytest.fixture
def fast_cfg(tmp_path):
    p = tmp_path / "fast.cfg"
    p.write_text(FAST)
    return p


def test_validate(capsys):
    assert cli.main(["validate", "--config", str(bundled_config_path())]) == 0
    assert "ok" in capsys.readouterr().out


def test_validate_bad_config(tmp_path, capsys):
    p = tmp_path / "bad.cfg"
    p.write_text(BASE.replace("Gamma_MHz = 121", "gama_MHz = 121"))
    assert cli.main(["validate", "--config", str(p)]) == 2
    assert "gama_MHz" in capsys.readouterr().err


def test_run_writes_outputs_and_manifest(fast_cfg, tmp_path):
    out = tmp_path / "run"
    assert cli.main(["run", "--preset", "single_tone", "--config", str(fast_cfg), "--out", str(out), "--plots"]) == 0
    manifest = json.loads((out / "manifest.json").read_text())
    names = {f["path"] for f in manifest["files"]}
    assert {"single_tone.csv", "single_tone.svg", "single_tone_summary.json"} <= names
    assert manifest["config_snapshot"] == FAST
    assert manifest["config_hash"] == io.sha256_of(FAST.encode())
    assert manifest["version"] and manifest["started"] and manifest["finished"]
    for f in manifest["files"]:
        assert io.sha256_of(out / f["path"]) == f["sha256"]


def test_rerun_is_byte_identical(fast_cfg, tmp_path):
    for name in ("a", "b"):
        assert cli.main(["run", "--preset", "saturation", "--config", str(fast_cfg),
                         "--out", str(tmp_path / name)]) == 0
    assert (tmp_path / "a" / "saturation.csv").read_bytes() == (tmp_path / "b" / "saturation.csv").read_bytes()


def test_parallel_matches_serial(tmp_path):
    text = FAST + "\n[sweep]\naxis = delta_phi_phi0\nvalues = 0.02, 0.054\n"
    p = tmp_path / "sweep.cfg"
    p.write_text(text)
    cfg = parse_config_text(text)
    cli.run_preset("eit_spectrum", cfg, tmp_path / "s", parallel=1)
    cli.run_preset("eit_spectrum", cfg, tmp_path / "p", parallel=2)
    assert (tmp_path / "s" / "eit_spectrum.csv").read_bytes() == (tmp_path / "p" / "eit_spectrum.csv").read_bytes()


def test_solver_error_exit_code(tmp_path, capsys):
    text = FAST.replace("Gamma_MHz = 121", "Gamma_MHz = 0").replace("gamma_phi_MHz = 3", "gamma_phi_MHz = 0") \
               .replace("kappa_MHz = 0.78", "kappa_MHz = 0")
    p = tmp_path / "lossless.cfg"
    p.write_text(text)
    assert cli.main(["run", "--preset", "saturation", "--config", str(p), "--out", str(tmp_path / "o")]) == 3
    err = capsys.readouterr().err
    assert "solver error" in err and "sweep point Omega_p = 0.5 MHz" in err


def test_fit_commands(tmp_path, capsys):
    w = np.linspace(6.23, 6.33, 201) * 2 * np.pi
    s = sp.Spectrum(w, sp.two_level_transmission(w, 2 * np.pi * 6.282, 2 * np.pi * 0.121, 2 * np.pi * 0.003))
    path = io.write_spectrum(tmp_path / "s.csv", s)
    assert cli.main(["fit", "--input", str(path), "--model", "two_level"]) == 0
    res = json.loads(capsys.readouterr().out)
    assert res[0]["Gamma_MHz"] == pytest.approx(121, rel=1e-6)

    wq, Om = 2 * np.pi * 6.2605, 2 * np.pi * 0.018
    d = parse_config_text(BASE).device
    blocks = []
    for dphi in (0.03, 0.054):
        delta, D2 = sp.lambda_detunings(w, wq, d.omega_r_tilde, 2 * np.pi * 0.725)
        blocks.append(sp.Spectrum(w, sp.analytic_transmission(delta, D2, d.Gamma, d.gamma, d.kappa, Om)))
    mp = io.write_spectrum_map(tmp_path / "m.csv", "delta_phi_phi0", [0.03, 0.054], blocks)
    assert cli.main(["fit", "--input", str(mp), "--model", "eit"]) == 0
    res = json.loads(capsys.readouterr().out)
    assert [r["delta_phi_phi0"] for r in res] == [0.03, 0.054]
    assert res[1]["Omega_phi_MHz"] == pytest.approx(18, rel=1e-6)


def test_fit_input_errors(tmp_path):
    p = tmp_path / "junk.csv"
    p.write_text("x,y\n1,2\n")
    assert cli.main(["fit", "--input", str(p), "--model", "two_level"]) == 2
    assert cli.main(["fit", "--input", str(tmp_path / "missing.csv"), "--model", "eit"]) == 2


def test_fit_non_convergence_exit_code(tmp_path, monkeypatch):
    w = np.linspace(39.0, 40.0, 50)
    path = io.write_spectrum(tmp_path / "s.csv", sp.Spectrum(w, np.ones(50)))

    def refuse(*args, **kwargs):
        raise FitError("least squares did not converge", 1.0)

    monkeypatch.setattr(sp, "_solve", refuse)
    assert cli.main(["fit", "--input", str(path), "--model", "two_level"]) == 4


def test_unknown_preset_rejected():
    with pytest.raises(SystemExit) as info:
        cli.main(["run", "--preset", "nope", "--config", "x.cfg"])
    assert info.value.code == 2


def test_module_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "lambda_eit", "validate", "--config", str(bundled_config_path())],
                       capture_output=True, text=True, env={"LAMBDA_EIT_LOG": "debug", "PATH": ""})
    assert r.returncode == 0 and "ok" in r.stdout
