import json
import subprocess
import sys

import pytest

from torusgg.cli import main

LEFSCHETZ = """
[tori.E]
tau = [0.0, 1.0]

[bundles.L]
torus = "E"
type = [1]

[[suites]]
name = "lefschetz"
kind = "lefschetz"
bundle = "L"
"""

PUSHFORWARD = """
[tori.E]
tau = [0.0, 1.0]

[isogenies.p]
target = "E"
lattice_matrix = [[1, 0], [0, 2]]
source_name = "E2"

[bundles.L]
torus = "E2"
type = [2]

[bundles.P]
pushforward = { isogeny = "p", bundle = "L" }
"""

GATE = """
[[suites]]
name = "hilbert_two"
kind = "mukai_gate"
v = "1;0;-2"
m = 2
fixed_determinant = true
"""


@pytest.fixture
def scene(tmp_path):
    def write(text, name="scene.toml"):
        path = tmp_path / name
        path.write_text(text)
        return str(path)

    return write


def run_json(capsys, argv):
    code = main(argv)
    out = capsys.readouterr().out
    return code, json.loads(out) if out.strip().startswith("{") else out


def test_run_lefschetz(capsys, scene):
    code, doc = run_json(capsys, ["run", scene(LEFSCHETZ)])
    assert code == 0
    assert doc["passed"] is True
    (suite,) = doc["suites"]
    assert suite["status"] == "PASS"
    reports = suite["result"]["reports"]
    assert reports["power_1"]["verdict"] == "BASE_POINT_FOUND"
    assert reports["power_2"]["verdict"] == "GENERATED_AT_ALL_SAMPLES"
    assert doc["tool"] == "torusgg" and len(doc["input_digest"]) == 64
    assert "seconds" not in json.dumps(doc)


def test_missing_torus_exit_2(capsys, scene):
    assert main(["run", scene("[bundles.L]\ntorus = 'Nope'\ntype = [1]\n")]) == 2
    assert "SceneReferenceError" in capsys.readouterr().err


def test_invalid_toml_exit_2(scene):
    assert main(["run", scene("x = [")]) == 2
    assert main(["run", "/nonexistent/scene.toml"]) == 2


def test_gate_reports_assumed(capsys, scene):
    code, doc = run_json(capsys, ["run", scene(GATE)])
    assert code == 0
    res = doc["suites"][0]["result"]
    assert res["verdict"] == "GG"
    assert any(item["status"] == "ASSUMED" for item in res["checklist"])


def test_failed_expectation_exit_1(capsys, scene):
    code, doc = run_json(capsys, ["run", scene(GATE + 'expect = "NOT_COVERED"\n')])
    assert code == 1
    assert doc["suites"][0]["status"] == "FAIL"


def test_loose_tail_bound_is_inconclusive(capsys, scene, monkeypatch):
    monkeypatch.setenv("TORUSGG_TAIL_BOUND", "1e-2")
    code, doc = run_json(capsys, ["run", scene(LEFSCHETZ)])
    assert code == 1
    assert doc["suites"][0]["status"] == "INCONCLUSIVE"
    assert doc["parameters"]["tail_bound"] == 1e-2


def test_flag_wins_over_environment(capsys, scene, monkeypatch):
    monkeypatch.setenv("TORUSGG_TAIL_BOUND", "1e-2")
    code, doc = run_json(capsys, ["run", scene(LEFSCHETZ), "--tail-bound", "1e-12"])
    assert code == 0


def test_small_radius_is_inconclusive(capsys, scene):
    code, doc = run_json(capsys, ["run", scene(LEFSCHETZ), "--radius", "2"])
    assert code == 1
    assert "TruncationInsufficient" in doc["suites"][0]["result"]["error"]


def test_bad_environment_value(scene, monkeypatch):
    monkeypatch.setenv("TORUSGG_GRID", "many")
    assert main(["run", scene(LEFSCHETZ)]) == 2


def test_grid_override(capsys, scene):
    code, doc = run_json(capsys, ["run", scene(LEFSCHETZ), "--grid", "4", "--torsion", "0"])
    assert code == 0
    assert doc["suites"][0]["result"]["reports"]["power_2"]["samples"] == 16


def test_report_file_and_threads_determinism(tmp_path, scene):
    path = scene(LEFSCHETZ)
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["run", path, "--report", str(a)]) == 0
    assert main(["run", path, "--report", str(b), "--threads", "2"]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_gg_check(tmp_path, capsys, scene):
    path = scene(PUSHFORWARD)
    out = tmp_path / "gg.json"
    code = main(["gg", "check", "--bundle", path, "--power", "2", "--grid", "8", "--report", str(out)])
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["inputs"]["bundle"] == "P"
    assert doc["report"]["verdict"] == "GENERATED_AT_ALL_SAMPLES"
    assert doc["report"]["h0"] == 8
    assert doc["report"]["samples"] == 64
    assert main(["gg", "check", "--bundle", f"{path}:L", "--power", "1", "--expect", "BASE_POINT_FOUND"]) == 1
    assert main(["gg", "check", "--bundle", f"{path}:Q"]) == 2


def test_mukai_commands(capsys, tmp_path):
    code, doc = run_json(capsys, ["mukai", "pair", "--v", "1;0;-3"])
    assert (code, doc["pair"]) == (0, 6)
    code, doc = run_json(capsys, ["mukai", "dim", "--v", "1;0;-5"])
    assert doc["moduli_dim"] == 12 and doc["albanese_fiber"]["fiber_dim"] == 8
    code, doc = run_json(capsys, ["mukai", "gate", "--v", "1;0;-2", "--m", "2", "--fixed-det"])
    assert doc["verdict"] == "GG"
    gram = tmp_path / "ns.json"
    gram.write_text(json.dumps({"gram": [[2, 1], [1, 2]]}))
    code, doc = run_json(capsys, ["mukai", "pair", "--ns-gram", str(gram), "--v", "1;1,0;0", "--w", "1;0,1;0"])
    assert doc["pair"] == 1
    toml_gram = tmp_path / "ns.toml"
    toml_gram.write_text("gram = [[4]]\n")
    code, doc = run_json(capsys, ["mukai", "pair", "--ns-gram", str(toml_gram), "--v", "0;1;0"])
    assert doc["pair"] == 4
    assert main(["mukai", "pair", "--v", "1;0"]) == 2
    assert main(["mukai", "gate"]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("[[1]]")
    assert main(["mukai", "pair", "--ns-gram", str(bad), "--v", "1;0;0"]) == 2


def test_fujita_commands(capsys):
    code, doc = run_json(capsys, ["fujita", "show"])
    assert code == 0 and doc["version"] == 1
    assert any(e["family_id"] == "curve" for e in doc["entries"])
    code, doc = run_json(capsys, ["fujita", "check", "--hypersurface", "4,2"])
    assert doc["value"] == "Exact(3)"
    code, doc = run_json(capsys, ["fujita", "check", "--blowup", "5"])
    assert doc["value"] == "LowerBound(4)"
    assert "error" in doc["theorem_a_exponents"]
    code, doc = run_json(capsys, ["fujita", "conjecture"])
    assert doc["fibrations"][0]["verdict"] == "CONSISTENT"
    code, doc = run_json(capsys, ["fujita", "conjecture", "--total", "surface", "--fiber", "curve", "--base", "curve"])
    assert doc["fibrations"][0]["verdict"] == "CONSISTENT"
    assert main(["fujita", "check", "--hypersurface", "3,3"]) == 1
    assert main(["fujita", "check"]) == 2
    assert main(["fujita", "conjecture", "--fibration", "nope"]) == 2


def test_scene_inspection(capsys, scene):
    path = scene(PUSHFORWARD)
    code, doc = run_json(capsys, ["torus", path])
    assert doc["isogenies"]["p"]["degree"] == 2
    assert doc["isogenies"]["p"]["kernel_coords"] == [["0", "0"], ["0", "1/2"]]
    code, doc = run_json(capsys, ["bundle", path, "--name", "L", "--point", "0.5,0.5"])
    assert doc["bundles"]["L"]["h0"] == 2
    assert len(doc["bundles"]["L"]["normalized_values"]) == 2
    code, doc = run_json(capsys, ["sh", path])
    assert doc["bundles"]["P"]["rank"] == 2 and doc["bundles"]["P"]["h0"] == 2
    assert main(["bundle", path, "--name", "P"]) == 2
    assert main(["torus", path, "--name", "X"]) == 2


def test_selftest_list(capsys):
    assert main(["selftest", "--list"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) >= 10
    assert lines[0].startswith("lefschetz_tau_i")


def test_entry_point_subprocess(tmp_path, scene):
    path = scene(GATE)
    reports = []
    for k in range(2):
        out = tmp_path / f"r{k}.json"
        proc = subprocess.run([sys.executable, "-m", "torusgg", "run", path, "--report", str(out)], capture_output=True, text=True)
        assert proc.returncode == 0, proc.stderr
        assert "hilbert_two" in proc.stderr
        reports.append(out.read_bytes())
    assert reports[0] == reports[1]
    proc = subprocess.run([sys.executable, "-m", "torusgg", "run", str(tmp_path / "missing.toml")], capture_output=True, text=True)
    assert proc.returncode == 2
