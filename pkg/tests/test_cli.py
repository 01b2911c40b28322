import json
import subprocess
import sys
from importlib import resources
from pathlib import Path

import jsonschema
import pytest

from algebroids.cli import load_schema, main, run_problem, validate_problem

FIXTURES = resources.files("algebroids").joinpath("fixtures")
DOCS = Path(__file__).resolve().parents[1] / "docs"

EXPECTED_EXIT = {
    "courant_qh.json": 0,
    "vertex_v0.json": 0,
    "ext_sl2.json": 0,
    "gl1_tetrahedron.json": 0,
    "sl2_tetrahedron.json": 0,
    "p1xp1.json": 0,
    "p1_segment.json": 0,
    "bad_expression.json": 2,
    "mc_violation.json": 3,
}


def fixture_path(name):
    return str(FIXTURES.joinpath(name))


def load(name):
    return json.loads(FIXTURES.joinpath(name).read_text(encoding="utf-8"))


def test_every_fixture_is_listed():
    names = {p.name for p in FIXTURES.iterdir() if p.name.endswith(".json")}
    assert names == set(EXPECTED_EXIT)


@pytest.mark.parametrize("name", sorted(EXPECTED_EXIT))
def test_fixture_exit_codes(name, capsys):
    code = main(["run", fixture_path(name), "--format", "json"])
    out = capsys.readouterr().out
    assert code == EXPECTED_EXIT[name], out
    doc = json.loads(out)
    jsonschema.validate(doc, load_schema("report.schema.json"))
    assert doc["exit_code"] == code


def test_json_output_is_deterministic(capsys):
    outs = []
    for _ in range(2):
        main(["run", fixture_path("courant_qh.json"), "--format", "json"])
        outs.append(capsys.readouterr().out)
    assert outs[0] == outs[1]


def test_human_output(capsys):
    code = main(["run", fixture_path("gl1_tetrahedron.json")])
    out = capsys.readouterr().out
    assert code == 0
    assert "[PASS] pi (pontryagin)" in out
    assert out.rstrip().endswith("PASS (exit 0)")


def test_bad_expression_reports_position(capsys):
    code = main(["run", fixture_path("bad_expression.json"), "--format", "json"])
    doc = json.loads(capsys.readouterr().out)
    assert code == 2
    assert doc["error"]["kind"] == "schema"
    assert doc["error"]["position"] == 4


def test_precondition_error_names_task(capsys):
    code = main(["run", fixture_path("mc_violation.json"), "--format", "json"])
    doc = json.loads(capsys.readouterr().out)
    assert code == 3
    assert doc["error"]["kind"] == "precondition"
    assert "MaurerCartanError" in doc["error"]["message"]


def test_emit_cocycle(tmp_path, capsys):
    target = tmp_path / "cocycles.json"
    code = main(["run", fixture_path("gl1_tetrahedron.json"), "--emit-cocycle", str(target)])
    capsys.readouterr()
    assert code == 0
    data = json.loads(target.read_text())
    assert set(data) == {"pi"}
    assert data["pi"]["H"] == {}
    assert "0-1-2" in data["pi"]["B"]


def test_require_coboundary_turns_none_into_failure(tmp_path, capsys):
    doc = load("p1xp1.json")
    doc["tasks"] = [t for t in doc["tasks"] if t["id"] in ("pi11",)]
    doc["tasks"].append({"id": "search", "kind": "coboundary", "cocycle": "pi11", "degree": 1})
    path = tmp_path / "p.json"
    path.write_text(json.dumps(doc))
    assert main(["run", str(path)]) == 0
    assert main(["run", str(path), "--require-coboundary"]) == 1
    capsys.readouterr()


def test_expect_found_mismatch_fails():
    doc = load("p1xp1.json")
    for t in doc["tasks"]:
        if t["id"] == "trivial":
            t["expect_found"] = False
    outcome = run_problem(doc)
    assert outcome.exit_code == 1
    status = {r.id: r.status for r in outcome.results}
    assert status["trivial"] == "fail"
    # a confirmed negative keeps its bounded status and does not fail the run
    assert status["nontrivial"] == "none-within-bound"
    nontrivial = next(r for r in outcome.results if r.id == "nontrivial")
    assert nontrivial.report.get("expected-outcome").passed


def test_unknown_reference():
    doc = load("gl1_tetrahedron.json")
    doc["tasks"][0]["gauges"]["0"] = "missing"
    outcome = run_problem(doc)
    assert outcome.exit_code == 2
    assert "missing" in outcome.error["message"]


def test_schema_violation():
    doc = load("courant_qh.json")
    doc["tasks"][0]["kind"] = "no-such-kind"
    outcome = run_problem(doc)
    assert outcome.exit_code == 2
    assert outcome.error["where"].startswith("tasks/0")


def test_invalid_json(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text("{\"tasks\": [")
    assert main(["run", str(path)]) == 2
    capsys.readouterr()


def test_fixtures_validate_against_schema():
    for name in EXPECTED_EXIT:
        validate_problem(load(name))


@pytest.mark.parametrize("name", ["problem.schema.json", "report.schema.json"])
def test_docs_schema_copies_match(name):
    packaged = json.loads(resources.files("algebroids").joinpath("schemas", name).read_text())
    documented = json.loads((DOCS / name).read_text())
    assert packaged == documented


def test_console_script_module_entry(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "algebroids.cli", "run",
                           fixture_path("p1_segment.json"), "--format", "json"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0, proc.stderr
    assert json.loads(proc.stdout)["passed"] is True
