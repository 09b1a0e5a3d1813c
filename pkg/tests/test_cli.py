import json
import subprocess
import sys

import numpy as np
import pytest

from levy_schrodinger import cli, verify
from levy_schrodinger.sampler import PathEnsemble


def _manifest(out):
    return json.loads((out / "manifest.json").read_text())


def test_version_and_help(capsys):
    with pytest.raises(SystemExit) as e:
        cli.main(["--version"])
    assert e.value.code == 0
    assert capsys.readouterr().out.strip() == cli.__version__


def test_eta_writes_table(tmp_path):
    assert cli.main(["eta", "--u", "0.5,2", "--out", str(tmp_path), "--quiet"]) == 0
    data = np.loadtxt(tmp_path / "eta.csv", delimiter=",", skiprows=1)
    assert np.allclose(data[:, 1], -data[:, 0], atol=1e-8)


@pytest.mark.parametrize("preset,v0", [("student3", -2.0), ("cauchy1", -2 / np.pi)])
def test_potential_preset(tmp_path, preset, v0):
    out = tmp_path / preset
    assert cli.main(["potential", "--preset", preset, "--a", "1", "--out", str(out), "--quiet"]) == 0
    res = _manifest(out)["results"]
    assert res["V_at_0"] == pytest.approx(v0, abs=1e-6)
    assert res["max_error_vs_closed_form"] < 1e-6
    assert (out / "v.csv").exists()


def test_potential_scales_with_a(tmp_path):
    assert cli.main(["potential", "--preset", "student3", "--a", "2", "--out", str(tmp_path),
                     "--quiet"]) == 0
    assert _manifest(tmp_path)["results"]["V_at_0"] == pytest.approx(-1.0, abs=1e-6)


@pytest.mark.parametrize("argv", [
    ["potential", "--preset", "student3"],
    ["potential"],
    ["simulate", "--preset", "student3", "--a", "1", "--n-paths", "0"],
    ["evolve", "--psi0", "nowhere.csv"],
    ["examples", "dump", "--name", "cauchy1"],
    ["potential", "--phi", "does-not-exist.csv"],
])
def test_usage_errors_exit_2(tmp_path, argv):
    assert cli.main(argv + ["--out", str(tmp_path), "--quiet"]) == 2


def test_argparse_errors_exit_2():
    with pytest.raises(SystemExit) as e:
        cli.main(["potential", "--preset", "nope"])
    assert e.value.code == 2


def test_evolve_wrong_energy_shows_up(tmp_path):
    base = ["evolve", "--preset", "student3", "--a", "1", "--t", str(np.pi), "--dt",
            str(np.pi / 100), "--record-every", "100", "--quiet", "--grid", "200,8192"]
    assert cli.main(base + ["--out", str(tmp_path / "ok")]) == 0
    assert cli.main(base + ["--energy", "0", "--out", str(tmp_path / "bad")]) == 0
    ok = _manifest(tmp_path / "ok")["results"]["stationarity_residual"]
    bad = _manifest(tmp_path / "bad")["results"]["stationarity_residual"]
    assert ok < 1e-2
    assert bad == pytest.approx(2.0, abs=1e-2)  # unit-norm state, phase off by pi


def test_simulate_same_seed_same_digest(tmp_path):
    digests = []
    for d in ("r1", "r2"):
        out = tmp_path / d
        assert cli.main(["simulate", "--preset", "student3", "--a", "1", "--n-paths", "200",
                         "--t", "1", "--seed", "17", "--out", str(out), "--quiet"]) == 0
        m = _manifest(out)
        digests.append(m["outputs"]["paths.csv"])
        assert m["seed"] == 17 and "ks_statistic" in m["results"]
    assert digests[0] == digests[1]
    pe = PathEnsemble.from_csv(tmp_path / "r1" / "paths.csv")
    assert pe.n_paths == 200


def test_simulate_levy(tmp_path):
    assert cli.main(["simulate", "--levy", "--n-paths", "50", "--t", "1", "--out", str(tmp_path),
                     "--quiet"]) == 0
    assert _manifest(tmp_path)["results"]["scheme"] == "exact"


def test_examples_dump(tmp_path):
    assert cli.main(["examples", "dump", "--name", "cauchy1", "--a", "1", "--out", str(tmp_path),
                     "--quiet"]) == 0
    for f in ("phi.csv", "rho.csv", "v.csv", "meta.json", "manifest.json"):
        assert (tmp_path / f).exists()
    r = np.loadtxt(tmp_path / "rho.csv", delimiter=",", skiprows=1)
    assert r[:, 1].max() == pytest.approx(1 / np.pi, abs=1e-12)


def test_config_file_with_flag_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# settings\npreset = student3\na = 2\nquiet = true\n")
    out = tmp_path / "o"
    assert cli.main(["potential", "--config", str(cfg), "--out", str(out)]) == 0
    assert _manifest(out)["results"]["V_at_0"] == pytest.approx(-1.0, abs=1e-6)
    assert cli.main(["potential", "--config", str(cfg), "--a", "1", "--out", str(out)]) == 0
    assert _manifest(out)["results"]["V_at_0"] == pytest.approx(-2.0, abs=1e-6)
    cfg.write_text("colour = red\n")
    assert cli.main(["potential", "--config", str(cfg), "--out", str(out)]) == 2


def test_verify_exit_codes(tmp_path, monkeypatch):
    def fake(ok):
        res = [verify.CheckResult("x", 1, "stub", 0.0, 1.0, ok)]
        return lambda *a, **k: verify.Report("fast", res, None)
    monkeypatch.setattr(verify, "run", fake(True))
    assert cli.main(["verify", "--quiet", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "verify_report.json").exists()
    monkeypatch.setattr(verify, "run", fake(False))
    assert cli.main(["verify", "--quiet"]) == 1


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "levy_schrodinger", "eta", "--u", "1"],
                       capture_output=True, text=True)
    assert r.returncode == 0 and "eta(1) = -1" in r.stdout
