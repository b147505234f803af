from __future__ import annotations

import json
import subprocess
import sys

import pytest

from conftest import BAD_SPEC_FILES, FIXTURES, SPEC_FILES
from fgl_neron.cli import main


def run(*argv):
    return main([str(a) for a in argv])


@pytest.mark.parametrize("path", SPEC_FILES, ids=lambda p: p.stem)
def test_compute_then_verify(path, tmp_path):
    out = tmp_path / "report.json"
    assert run("compute", "--input", path, "--degree", 6, "--output", out) == 0
    assert json.loads(out.read_text())["verdict"] == "pass"
    assert run("verify", "--input", out) == 0


@pytest.mark.parametrize("path", BAD_SPEC_FILES, ids=lambda p: p.stem)
def test_bad_specs_exit_2(path, capsys):
    assert run("compute", "--input", path) == 2
    assert capsys.readouterr().err.startswith("error:")


def test_usage_errors(tmp_path):
    spec = FIXTURES / "specs" / "q3_d1_norm_one.json"
    assert run() == 2
    assert run("compute") == 2
    assert run("compute", "--input", tmp_path / "missing.json") == 2
    assert run("compute", "--input", spec, "--degree", 1) == 2
    assert run("compute", "--input", spec, "--format", "xml") == 2
    assert run("--help") == 0


def test_verify_detects_tampering(tmp_path, capsys):
    out = tmp_path / "r.json"
    run("compute", "--input", FIXTURES / "specs" / "q3_d1_norm_one.json", "--degree", 5, "--output", out)
    report = json.loads(out.read_text())
    report["lambda"][0][-1]["coefficient"] = "1/7"
    out.write_text(json.dumps(report))
    capsys.readouterr()
    assert run("verify", "--input", out) == 1
    assert "differs" in capsys.readouterr().out


def test_text_format(capsys):
    assert run("compute", "--input", FIXTURES / "specs" / "quadratic_1_1.json", "--degree", 5, "--format", "text") == 0
    out = capsys.readouterr().out
    assert "verdict: pass" in out and "strong_iso_F_q_integral" in out


def test_compare_modes(tmp_path):
    paths = {}
    for name in ("quadratic_1_1", "q3_d1_norm_one", "q5_d1_norm_one", "q3_d2_mixed"):
        paths[name] = tmp_path / f"{name}.json"
        run("compute", "--input", FIXTURES / "specs" / f"{name}.json", "--degree", 6, "--output", paths[name])
    assert run("compare", "--a", paths["quadratic_1_1"], "--b", paths["q3_d1_norm_one"]) == 0
    assert run("compare", "--a", paths["quadratic_1_1"], "--b", paths["q5_d1_norm_one"]) == 1
    assert run("compare", "--a", paths["q3_d2_mixed"], "--b", paths["q3_d1_norm_one"]) == 2
    D = tmp_path / "D.json"
    D.write_text("[[0, 1]]")
    assert run("compare", "--a", paths["q3_d2_mixed"], "--b", paths["q3_d1_norm_one"], "--mode", "hom",
               "--matrix", D) == 0
    assert run("compare", "--a", paths["q3_d2_mixed"], "--b", paths["q3_d1_norm_one"], "--mode", "hom") == 2


def test_module_entry_point():
    res = subprocess.run(
        [sys.executable, "-m", "fgl_neron", "compute", "--input", str(FIXTURES / "bad" / "q4_wild.json")],
        capture_output=True, text=True,
    )
    assert res.returncode == 2
