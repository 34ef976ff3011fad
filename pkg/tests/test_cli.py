import csv
import io
import json
import os
from importlib import resources

import jsonschema
import numpy as np
import pytest

from rankone import acceptance, cli
from rankone.errors import DomainError


def schema(name):
    return json.loads(resources.files("rankone").joinpath(f"schemas/{name}.schema.json").read_text())


def run(argv, capsys):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def read_csv(text):
    lines = text.splitlines()
    assert lines[0].startswith("# rankone.")
    rows = list(csv.reader(io.StringIO("\n".join(lines[1:]))))
    return lines[0], rows[0], np.array(rows[1:], dtype=float)


def test_cfun_n3_closed_form(capsys):
    code, out, _ = run(["cfun", "--n", "3", "--tau-range", "0.1:100:200"], capsys)
    assert code == 0
    tag, header, data = read_csv(out)
    assert tag == "# rankone.cfun/1"
    assert header == list(cli.CSV_HEADERS["cfun"])
    assert data.shape == (200, 4)
    tau = data[:, 0]
    ref = 1 / (2j * tau)
    got = data[:, 1] + 1j * data[:, 2]
    assert np.max(np.abs(got - ref) / np.abs(ref)) < 1e-12
    assert np.allclose(data[:, 3], 4 * tau ** 2, rtol=1e-12)


def test_table_json_schema(capsys):
    for argv in (["cfun", "--tau-range", "1:2:5", "--format", "json"],
                 ["spherical", "--s", "0.5+2i", "--t-range", "0:3:7", "--format", "json"]):
        code, out, _ = run(argv, capsys)
        assert code == 0
        jsonschema.validate(json.loads(out), schema("table"))


def test_spherical_origin(capsys):
    code, out, _ = run(["spherical", "--n", "3", "--s", "0.5+1i", "--t-range", "0:2:3"], capsys)
    assert code == 0
    _, _, data = read_csv(out)
    assert data[0, 1] == 1.0 and data[0, 2] == 0.0


def test_regularize_two_subtractions(capsys):
    code, out, _ = run(["regularize", "--a", "1.2", "--b", "0.5+3i"], capsys)
    assert code == 0
    doc = json.loads(out)
    jsonschema.validate(doc, schema("regularize"))
    assert len(doc["subtractions"]) == 2
    assert {s["coeff_tag"] for s in doc["subtractions"]} == {"1", "c_b"}


def test_regularize_four_subtractions(capsys):
    code, out, _ = run(["regularize", "--a", "0.5+2i", "--b", "0.5+5i"], capsys)
    assert code == 0 and len(json.loads(out)["subtractions"]) == 4


def test_eisenstein_json(capsys):
    code, out, _ = run(["eisenstein", "--s", "0.5+3i", "--z", "0.1+1.2i", "--z", "i", "--constant-term"], capsys)
    assert code == 0
    doc = json.loads(out)
    jsonschema.validate(doc, schema("eisenstein"))
    assert len(doc["values"]) == 2
    assert abs(doc["constant_term"]["leading"]["re"] - 1) < 1e-6


def test_finite_verify(capsys):
    code, out, _ = run(["finite-verify", "--model", "dihedral.json", "--pairs", "5"], capsys)
    assert code == 0
    doc = json.loads(out)
    jsonschema.validate(doc, schema("finite_verify"))
    assert doc["passed"]


def test_finite_verify_float_override(capsys):
    code, out, _ = run(["finite-verify", "--model", "dihedral.json", "--float", "--pairs", "3"], capsys)
    assert code == 0 and json.loads(out)["model"]["exact"] is False


def test_determinism(tmp_path):
    outputs = []
    for k in range(2):
        path = tmp_path / f"run{k}.json"
        assert cli.main(["finite-verify", "--model", "symmetric.json", "--pairs", "4", "--seed", "3",
                         "--output", str(path)]) == 0
        outputs.append(path.read_bytes())
    assert outputs[0] == outputs[1]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for p in (a, b):
        assert cli.main(["transform", "--width", "0.8", "--output", str(p)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_atomic_write_leaves_no_temporaries(tmp_path):
    target = tmp_path / "out.csv"
    target.write_text("old")
    assert cli.main(["cfun", "--tau-range", "1:2:3", "--output", str(target)]) == 0
    assert target.read_text().startswith("# rankone.cfun/1")
    assert os.listdir(tmp_path) == ["out.csv"]


def test_failed_run_keeps_previous_file(tmp_path):
    target = tmp_path / "out.json"
    target.write_text("previous")
    assert cli.main(["regularize", "--a", "0.25", "--b", "0.25+1i", "--output", str(target)]) == 1
    assert target.read_text() == "previous"
    assert os.listdir(tmp_path) == ["out.json"]


@pytest.mark.parametrize("argv,code,prefix", [
    (["regularize", "--a", "0.25", "--b", "0.25+1i"], 1, "regularization."),
    (["regularize", "--a", "0.5+2i", "--b", "0.5-2i"], 1, "regularization."),
    (["eisenstein", "--s", "1.001"], 1, "eisenstein2d."),
    (["cfun", "--tau-range", "0:1:5"], 1, "harish_chandra."),
    (["finite-verify", "--model", "missing.json"], 1, "finite_model."),
    (["fundamental", "--lam", "0.3"], 1, "sobolev."),
    (["regularize", "--a", "bogus", "--b", "1"], 1, "regularization."),
    (["cfun", "--tau-range", "1:2"], 1, "harish_chandra.domain"),
    (["spherical"], 2, "cli."),
    (["nosuch"], 2, "cli."),
])
def test_error_json(argv, code, prefix, capsys):
    got, out, err = run(argv, capsys)
    assert got == code
    assert out == ""
    doc = json.loads(err.strip().splitlines()[-1])
    jsonschema.validate(doc, schema("error"))
    assert doc["error"]["code"].startswith(prefix)
    assert doc["error"]["precondition"]


def test_parse_range():
    assert np.allclose(cli.parse_range("0:1:5"), [0, 0.25, 0.5, 0.75, 1])
    assert cli.parse_range("2:2:1").tolist() == [2.0]
    for bad in ("1:0:5", "0:1:0", "a:b:c", "0:1"):
        with pytest.raises(DomainError):
            cli.parse_range(bad)


def test_report_empty(capsys):
    code, out, _ = run(["report", "--criteria", ""], capsys)
    assert code == 0
    doc = json.loads(out)
    jsonschema.validate(doc, schema("report"))
    assert doc["count"] == 0 and doc["criteria"] == [] and doc["passed"]


def test_report_localizes_failure(monkeypatch, capsys):
    fake = ((1, "passing", lambda: (True, {"max_error": 0.0}), 1.0),
            (2, "failing", lambda: (False, {"max_error": 1.0}), 1.0),
            (3, "crashing", lambda: 1 / 0, 1.0))
    monkeypatch.setattr(acceptance, "CRITERIA", fake)
    code, out, err = run(["report", "--criteria", "1,2,3"], capsys)
    assert code == 1
    doc = json.loads(out)
    jsonschema.validate(doc, schema("report"))
    status = {c["number"]: c["passed"] for c in doc["criteria"]}
    assert status == {1: True, 2: False, 3: False}
    assert "ZeroDivisionError" in doc["criteria"][2]["error"]
    assert "FAIL criterion 2" in err and "PASS criterion 1" in err


def test_report_rejects_unknown_criteria(capsys):
    code, _, err = run(["report", "--criteria", "12"], capsys)
    assert code == 1
    assert json.loads(err)["error"]["code"] == "acceptance.domain"


def test_help_exits_zero(capsys):
    assert cli.main(["--help"]) == 0
