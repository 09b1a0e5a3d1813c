import json

import numpy as np
import pytest

from levy_schrodinger import verify


def _ctx(mutation=None, n_paths=2000):
    return {"seed": 1, "n_paths": n_paths, "mutation": mutation}


def test_cheap_checks_pass():
    for fn in (verify.check_symbol, verify.check_product_rule, verify.check_figures,
               verify.check_degeneracy, verify.check_kernel_closure):
        r = fn(_ctx())
        assert r.passed, r.line()


def test_mutation_is_detected():
    assert not verify.check_kernel_closure(_ctx("invert-ratio")).passed


def test_mutated_kernel_inverts_ratio():
    good = verify.preset_kernel("student3")
    bad = verify.preset_kernel("student3", mutation="invert-ratio")
    x, y = 0.4, np.array([0.3, -2.0])
    assert np.allclose(bad.ratio(x, y) * good.ratio(x, y), 1.0)
    with pytest.raises(ValueError):
        verify.preset_kernel("student3", mutation="scramble")


def test_mutated_sampler_breaks_invariance():
    r = verify.check_ks(_ctx("invert-ratio", 3000))
    assert not r.passed


def test_report_text_and_json(tmp_path):
    res = [verify.CheckResult("alpha", 1, "ok", 1e-9, 1e-6, True),
           verify.CheckResult("beta", None, "bad", 2.0, 1.0, False)]
    rep = verify.Report("fast", res)
    lines = rep.text().splitlines()
    assert lines[0].startswith("PASS [ 1] alpha")
    assert lines[1].startswith("FAIL [--] beta")
    assert lines[-1] == "1/2 checks passed; failed: beta"
    rep.write_json(tmp_path / "r.json")
    doc = json.loads((tmp_path / "r.json").read_text())
    assert doc["passed"] is False and doc["failed"] == ["beta"]
    assert "defaults" in doc


def test_run_rejects_unknown_suite():
    with pytest.raises(ValueError):
        verify.run("medium")
    with pytest.raises(ValueError):
        verify.run("fast", mutation="flip")
