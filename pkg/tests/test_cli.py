import csv
import json
from pathlib import Path

import jsonschema
import pytest

from ratdim.cli import CommandReport, report_schema, run_command, validate_report

INPUTS = Path(__file__).resolve().parent.parent / "inputs"


def _run(capsys, *argv):
    code = run_command(list(argv))
    out, err = capsys.readouterr()
    return code, (json.loads(out) if out.strip().startswith("{") else out), err


def test_schema_is_valid_draft_2020_12():
    jsonschema.Draft202012Validator.check_schema(report_schema())


def test_status_invariant_enforced_by_schema():
    rep = CommandReport("x")
    rep.check("a", True)
    rep.check("b", False, "bad")
    obj = rep.to_json()
    assert obj["status"] == "failed"
    validate_report(obj)
    obj["status"] = "ok"
    with pytest.raises(jsonschema.ValidationError):
        validate_report(obj)


def test_help(capsys):
    code, out, _ = _run(capsys, "--help")
    assert code == 0 and "verify-remark33" in out


def test_usage_errors(capsys, tmp_path):
    assert run_command(["no-such-command"]) == 2
    assert run_command(["suite", "--window", "x"]) == 2
    assert run_command(["interpolate"]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run_command(["interpolate", "--input", str(bad)]) == 2
    err = capsys.readouterr().err.strip().splitlines()
    assert err[-1].startswith("ratdim interpolate:") and "malformed JSON" in err[-1]
    missing = tmp_path / "missing.json"
    missing.write_text("{}")
    assert run_command(["interpolate", "--input", str(missing)]) == 2
    assert run_command(["verify-remark33", "--p", "2", "--q", "4"]) == 2


def test_remark(capsys):
    code, rep, _ = _run(capsys, "verify-remark33", "--p", "2", "--q", "3")
    assert code == 0 and rep["status"] == "ok"
    assert rep["data"]["remark"]["rational_interpolant"] == ["1/2", "0"]
    assert len(rep["checks"]) == 4


def test_converse(capsys):
    code, rep, _ = _run(capsys, "verify-lemma21-converse", "--n", "2", "--n", "10")
    assert code == 0
    assert rep["data"]["N=10"]["lower_bound"] == "25"


@pytest.mark.parametrize("argv,code,status", [
    (["interpolate", "--input", "interpolate.json"], 0, "ok"),
    (["check-rip", "--input", "rip_dyadic.json"], 0, "unknown"),
    (["check-unperforated", "--input", "threshold.json"], 1, "failed"),
    (["dimension-drop-k0", "--input", "z2.json"], 0, "ok"),
    (["matrix-dimension-range", "--input", "z2.json"], 0, "ok"),
    (["kms", "verify-kernel", "--input", "bundle.json", "--window", "2"], 0, "ok"),
    (["kms", "k0", "--input", "bundle_family.json"], 0, "ok"),
])
def test_subcommands_on_shipped_inputs(capsys, argv, code, status):
    argv = [str(INPUTS / a) if a.endswith(".json") else a for a in argv]
    got, rep, _ = _run(capsys, *argv)
    assert got == code and rep["status"] == status
    validate_report(rep)


def test_states_csv_and_output_file(capsys, tmp_path):
    out, table = tmp_path / "r.json", tmp_path / "s.csv"
    code = run_command(["kms", "states", "--input", str(INPUTS / "states.json"), "--csv", str(table),
                        "--output", str(out)])
    assert code == 0 and capsys.readouterr().out == ""
    rep = json.loads(out.read_text())
    validate_report(rep)
    rows = list(csv.reader(table.open()))
    assert rows[0] == ["beta", "lower", "upper"]
    assert rows[1] == ["0", "3", "3"]
    assert len(rows) == 5


def test_suite_is_deterministic(capsys):
    code1, a, _ = _run(capsys, "suite")
    code2, b, _ = _run(capsys, "suite")
    assert code1 == code2 == 0
    for r in (a, b):
        del r["timing"]
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)
    assert all(c["verdict"] == "passed" for c in a["checks"])


def test_main_module_runs():
    import subprocess
    import sys
    p = subprocess.run([sys.executable, "-m", "ratdim", "verify-remark33"], capture_output=True, text=True)
    assert p.returncode == 0 and json.loads(p.stdout)["command"] == "verify-remark33"


def test_internal_errors_exit_1(monkeypatch, capsys):
    import ratdim.cli as cli

    def boom(args, rep):
        raise RuntimeError("kaput")
    monkeypatch.setitem(cli._DISPATCH, "suite", boom)
    assert run_command(["suite"]) == 1
    assert "internal error" in capsys.readouterr().err
