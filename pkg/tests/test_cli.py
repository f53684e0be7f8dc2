import json
import subprocess
import sys
from pathlib import Path

from aapp.cli import main

DATA = Path(__file__).parent / "data"
TOOLS = ["--config", str(DATA / "tools_config.yaml")]
EXAMPLE = ["--script", str(DATA / "example_script.yaml"), "--config", str(DATA / "example_config.yaml")]


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_cooccur_candidate_holds_with_witness(capsys):
    code, out, _ = run(capsys, "cooccur", "--script", str(DATA / "tools_candidate.yaml"), *TOOLS, "--functions", "f,g", "--worker", "local")
    assert code == 0
    assert out.splitlines() == ["HOLDS", "  (start, f, local)", "  (start, g, local)"]


def test_cooccur_fixed_does_not_hold(capsys):
    code, out, _ = run(capsys, "cooccur", "--script", str(DATA / "tools_fixed.yaml"), *TOOLS, "--functions", "f,g", "--worker", "local")
    assert code == 1 and out.strip() == "DOES_NOT_HOLD"


def test_unknown_function_is_input_error(capsys):
    code, _, err = run(capsys, "reach", "--script", str(DATA / "tools_fixed.yaml"), *TOOLS, "--function", "zz", "--worker", "local")
    assert code == 3 and "zz" in err


def test_usage_errors_exit_3(capsys):
    assert run(capsys, "reach")[0] == 3
    assert run(capsys, "parse", str(DATA / "missing.yaml"))[0] == 3
    assert run(capsys, "bogus")[0] == 3


def test_bad_script_reports_line(tmp_path, capsys):
    bad = tmp_path / "bad.yaml"
    bad.write_text("- t:\n  - workers: *\n    strategy: sometimes\n")
    code, _, err = run(capsys, "parse", str(bad))
    assert code == 3 and "line 3" in err


def test_schedule_and_classify(capsys):
    assert run(capsys, "schedule", *EXAMPLE, "--function", "f")[1].strip() == "w1"
    assert run(capsys, "classify", str(DATA / "example_script.yaml"))[1].strip() == "PlainApp"
    assert run(capsys, "classify", str(DATA / "tools_fixed.yaml"))[1].strip() == "NegOnly"


def test_parse_and_encode_dump(capsys):
    code, out, _ = run(capsys, "parse", str(DATA / "example_script.yaml"))
    assert code == 0 and "capacity_used 80%" in out
    code, out, _ = run(capsys, "--format", "json", "encode", str(DATA / "example_script.yaml"))
    record = json.loads(out)
    assert record["f_tag"] == [
        {"workers": ["w1", "w2"], "strategy": "best_first", "invalidate": ["capacity_used 80%"], "affine": [], "anti_affine": []}
    ]
    assert "default" in record


def test_json_witness_replays(tmp_path, capsys):
    args = ["cooccur", "--script", str(DATA / "tools_candidate.yaml"), *TOOLS, "--functions", "f,g", "--worker", "local"]
    code, out, _ = run(capsys, "--format", "json", *args)
    payload = json.loads(out)
    assert code == 0 and payload["decision"] == "HOLDS"
    assert payload["stats"]["witness_length"] == 2
    trace = tmp_path / "trace.json"
    trace.write_text(json.dumps(payload["witness"]))
    code, out, _ = run(capsys, "simulate", "--format", "json", "--script", str(DATA / "tools_candidate.yaml"), *TOOLS, "--trace", str(trace))
    assert code == 0
    final = json.loads(out)["configuration"]
    assert final["local"]["allocated"] == {"f": 1, "g": 1}


def test_simulate_rejects_illegal_trace(tmp_path, capsys):
    trace = tmp_path / "t.yaml"
    trace.write_text("- {action: start, function: f, worker: w2}\n")
    assert run(capsys, "simulate", *EXAMPLE, "--trace", str(trace))[0] == 3
    code, out, _ = run(capsys, "simulate", *EXAMPLE, "--trace", str(trace), "--lenient")
    assert code == 0 and "w2: {f} used 8/20" in out


def test_deterministic_output(capsys):
    args = ["--format", "json", "check", "--script", str(DATA / "tools_candidate.yaml"), *TOOLS, "--goal", "local:f:1,local:g:1", "--deterministic"]
    first = run(capsys, *args)
    assert first == run(capsys, *args)
    assert first[0] == 0


def test_deterministic_across_processes():
    args = [sys.executable, "-m", "aapp.cli", "--format", "json", "cooccur", "--script", str(DATA / "tools_candidate.yaml"),
            *TOOLS, "--functions", "f,g", "--worker", "local", "--deterministic"]
    runs = [subprocess.run(args, capture_output=True, check=False) for _ in range(2)]
    assert runs[0].returncode == 0
    assert runs[0].stdout == runs[1].stdout


def test_bound_exhausted_exit_code(capsys, monkeypatch):
    args = ["check", "--script", str(DATA / "tools_fixed.yaml"), *TOOLS, "--goal", "local:f:1,local:g:1"]
    monkeypatch.setenv("AAPP_MAX_STATES", "10")
    assert run(capsys, *args)[0] == 2
    assert run(capsys, *args, "--max-states", "0")[0] == 1


def test_emit_pddl(tmp_path, capsys):
    prefix = tmp_path / "out"
    code, _, _ = run(capsys, "emit-pddl", *EXAMPLE, "--reach", "f:w2", "--out-prefix", str(prefix))
    assert code == 0
    assert "(= (number_of_f_in_W f w2) 1)" in (tmp_path / "out-problem.pddl").read_text()
    assert "start_f_b0_w2" in (tmp_path / "out-domain.pddl").read_text()
    raw = tmp_path / "goal.pddl"
    raw.write_text("(exists (?w - worker) (> (number_of_f_in_W f ?w) 0))")
    run(capsys, "emit-pddl", *EXAMPLE, "--goal-file", str(raw), "--out-prefix", str(prefix))
    assert "(exists (?w - worker)" in (tmp_path / "out-problem.pddl").read_text()
    run(capsys, "emit-pddl", *EXAMPLE, "--cooccur", "f:f:w2", "--goal-at-least", "--out-prefix", str(prefix))
    assert ">= (number_of_f_in_W f w2) 2" in (tmp_path / "out-problem.pddl").read_text()
