import csv
import io
import json

import pytest

from ontocheck.conformance import Report, validate
from ontocheck.refinement import Mode, verify_refinement
from ontocheck.reports import MATRIX_COLUMNS, serialize_report
from ontocheck.syntax import parse_refinement_map


@pytest.fixture(scope="module")
def matrix(ws, corpus):
    rmap = parse_refinement_map((corpus / "SituationCO-vs-ThingFO.refmap").read_text())
    return verify_refinement(rmap, ws)


def test_empty_report_json_is_canonical():
    assert serialize_report(Report(), "json") == '{"diagnostics":[],"status":"pass"}'


def test_unknown_format():
    with pytest.raises(ValueError):
        serialize_report(Report(), "xml")


def test_a1_report_json(ws, fixture_model):
    data = json.loads(serialize_report(validate(fixture_model("a1_fail"), ws), "json"))
    assert data["status"] == "fail"
    a1 = [d for d in data["diagnostics"] if d["code"] == "AXIOM_A1"]
    assert len(a1) == 1
    assert a1[0]["witness"] == {"ps": "ps1", "thing": "te1"}
    assert a1[0]["subjects"] == ["ps1", "te1"]


def test_json_is_stable(ws, fixture_model):
    runs = {serialize_report(validate(fixture_model("scenario"), ws), "json") for _ in range(3)}
    assert len(runs) == 1


def test_validation_table_and_csv(ws, fixture_model):
    report = validate(fixture_model("scenario"), ws)
    table = serialize_report(report, "table").splitlines()
    assert table[0].split() == ["code", "severity", "subjects", "message"]
    assert table[1].startswith("MULT_MIN")
    rows = list(csv.reader(io.StringIO(serialize_report(report, "csv"))))
    assert rows[1][:3] == ["MULT_MIN", "error", "org1 works at"]


def test_matrix_table(matrix):
    lines = serialize_report(matrix, "table").splitlines()
    assert len(lines) == 22
    assert lines[0].split("  ")[0] == "card"
    assert "Generic Situation" in lines[1] and lines[1].endswith("pass")


def test_matrix_csv_column_order(matrix):
    rows = list(csv.reader(io.StringIO(serialize_report(matrix, "csv"))))
    assert len(rows) == 22
    assert rows[0] == MATRIX_COLUMNS + MATRIX_COLUMNS + ["verdict"]
    influences = next(r for r in rows if r[2] == "influences")
    assert influences == ["*", "Context Entity", "influences", "*", "Target Entity",
                          "1..*", "(Power of) Thing", "interacts with other", "1..*", "Thing",
                          "pass"]


def test_matrix_json(ws, corpus, matrix):
    data = json.loads(serialize_report(matrix, "json"))
    assert data["status"] == "pass" and data["mode"] == "default"
    assert len(data["rows"]) == 21 and data["unmapped_lower"] == []
    first = data["rows"][0]
    assert first["lower"]["relationship"] == "implies universals"
    assert first["upper"]["source"] == "Assertion on Universals"
    rmap = parse_refinement_map((corpus / "SituationCO-vs-ThingFO.refmap").read_text())
    strict = json.loads(serialize_report(verify_refinement(rmap, ws, Mode.STRICT), "json"))
    assert sum(r["verdict"] == "fail" for r in strict["rows"]) == 6
