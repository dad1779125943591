import json
import subprocess
import sys
from pathlib import Path

import pytest

from factories import dumps, minimal
from qcsync.cli import main
from qcsync.report import EVENT_COLUMNS, parse_report

SCENARIO = Path(__file__).resolve().parent.parent / "scenarios" / "bob_to_ed_and_alice.json"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.mark.parametrize("model", ["linear", "pmf", "delays"])
def test_plan(capsys, model):
    code, out, _ = run(capsys, "plan", model, "--scenario", SCENARIO)
    assert code == 0
    doc = json.loads(out)
    assert [p["node_id"] for p in doc["plans"]] == ["ed", "alice"]
    assert doc["failures"] == []


def test_plan_restricted_to_node(capsys):
    code, out, _ = run(capsys, "plan", "linear", "--scenario", SCENARIO, "--node", "alice")
    assert code == 0
    assert [p["node_id"] for p in json.loads(out)["plans"]] == ["alice"]


def test_simulate_csv(capsys, tmp_path):
    out_file = tmp_path / "report.csv"
    code, out, err = run(capsys, "simulate", "--scenario", SCENARIO,
                         "--format", "csv", "--out", out_file)
    assert code == 0 and out == ""
    lines = out_file.read_text().splitlines()
    assert lines[0] == ",".join(EVENT_COLUMNS)
    assert len(lines) == 9
    assert "1 dropped" in err


def test_simulate_tolerance_flag(capsys):
    code, out, _ = run(capsys, "simulate", "--scenario", SCENARIO, "--tolerance-ps", "1")
    report = parse_report(out)
    assert (report.dropped, report.tolerance) == (0, 1)


def test_verify_single_model_report(capsys):
    code, out, err = run(capsys, "verify", "delays", "--scenario", SCENARIO)
    assert code == 0
    report = parse_report(out)
    gaps = {p.node_id: p.predicted_gap for p in report.plans}
    assert all(e.t_delta == -gaps[e.node_id] for e in report.events)
    assert "0 gap mismatches" in err


def test_verify_all_models(capsys):
    code, out, _ = run(capsys, "verify", "--scenario", SCENARIO)
    assert code == 0
    assert set(json.loads(out)) == {"linear", "pmf", "delays"}


def test_verify_csv_needs_one_model(capsys):
    code, _, _ = run(capsys, "verify", "--scenario", SCENARIO, "--format", "csv")
    assert code == 2


def test_invalid_scenario_exit_code(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(dumps(minimal(medium={"n_p": 1.6})))
    code, _, err = run(capsys, "simulate", "--scenario", bad)
    assert code == 2
    assert f"{bad}:" in err and "1 < n_p < 3/2" in err


def test_parse_error_exit_code(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{\n")
    code, _, err = run(capsys, "plan", "linear", "--scenario", bad)
    assert code == 2
    assert ":2:1" in err


def test_infeasible_exit_code(capsys, tmp_path):
    doc = json.loads(SCENARIO.read_text())
    doc["targets"] = [{"node": "ed", "lead": {"value": 12, "unit": "us"}}]
    path = tmp_path / "s.json"
    path.write_text(json.dumps(doc))
    code, out, err = run(capsys, "plan", "linear", "--scenario", path)
    assert code == 3
    assert json.loads(out)["failures"][0]["error"] == "LengthUnderflow"
    assert "LengthUnderflow" in err
    code, _, _ = run(capsys, "verify", "delays", "--scenario", path)
    assert code == 3


def test_missing_file_exit_code(capsys, tmp_path):
    code, _, _ = run(capsys, "simulate", "--scenario", tmp_path / "nope.json")
    assert code == 4


def test_unwritable_output_exit_code(capsys, tmp_path):
    code, _, _ = run(capsys, "simulate", "--scenario", SCENARIO,
                     "--out", tmp_path / "missing-dir" / "r.json")
    assert code == 4


def test_unknown_node_flag(capsys):
    code, _, _ = run(capsys, "simulate", "--scenario", SCENARIO, "--node", "eve")
    assert code == 2


def test_bad_arguments_exit_code(capsys):
    with pytest.raises(SystemExit) as info:
        main(["plan", "sideways", "--scenario", str(SCENARIO)])
    assert info.value.code == 2


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "qcsync", "verify", "linear", "--scenario", str(SCENARIO)],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert json.loads(proc.stdout)["totals"]["dropped"] == 0


def test_verify_mismatch_exit_code(capsys, monkeypatch):
    import dataclasses

    import qcsync.pipeline as pipeline
    real = pipeline.plan_multinode

    def off_by_one(*args, **kwargs):
        result = real(*args, **kwargs)
        plans = tuple(dataclasses.replace(p, predicted_gap=p.predicted_gap + 1)
                      for p in result.plans)
        return dataclasses.replace(result, plans=plans)

    monkeypatch.setattr(pipeline, "plan_multinode", off_by_one)
    code, _, err = run(capsys, "verify", "linear", "--scenario", SCENARIO)
    assert code == 1
    assert "expected t_delta" in err
    code, _, _ = run(capsys, "verify", "linear", "--scenario", SCENARIO,
                     "--gap-tolerance-ps", "1")
    assert code == 0
