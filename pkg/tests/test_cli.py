from __future__ import annotations

from pathlib import Path

import pytest

from htnact.cli import main
from htnact.fixtures import fixture_path

DATA = Path(__file__).parent / "data"

ROVER = str(fixture_path("rover.htn"))
ROVER_JUMP = str(fixture_path("rover_jump.htn"))
PROB = str(fixture_path("rover.prob"))
PROB_NOCALI = str(fixture_path("rover_nocali.prob"))
EVT = str(fixture_path("walkthrough.evt"))
CHOICES = str(fixture_path("walkthrough.choices"))
AGENT_CHOICES = str(fixture_path("agent_walkthrough.choices"))

WALKTHROUGH_TARGET = (
    "calibrate . moveCams . monitor . estabConn . "
    "extData(loc1) . sendExtData(loc1) . breakConn"
)


def test_act_scripted_walkthrough_matches_golden(tmp_path, capsys):
    out = tmp_path / "trace.txt"
    code = main(
        ["act", ROVER, PROB_NOCALI, "--strategy", f"script:{CHOICES}", "--out", str(out)]
    )
    assert code == 0
    assert out.read_text() == (DATA / "walkthrough_trace.txt").read_text()


def test_act_agent_walkthrough_matches_golden(tmp_path):
    out = tmp_path / "trace.txt"
    code = main(
        [
            "act",
            ROVER,
            PROB_NOCALI,
            EVT,
            "--strategy",
            f"script:{AGENT_CHOICES}",
            "--verify-soundness",
            "--out",
            str(out),
        ]
    )
    assert code == 0
    assert out.read_text() == (DATA / "agent_walkthrough_trace.txt").read_text()


def test_act_default_run_matches_golden(tmp_path):
    out = tmp_path / "trace.txt"
    code = main(["act", ROVER, PROB_NOCALI, "--out", str(out)])
    assert code == 0
    assert out.read_text() == (DATA / "default_trace.txt").read_text()


def test_act_runs_are_byte_identical(tmp_path):
    first = tmp_path / "a.txt"
    second = tmp_path / "b.txt"
    for out in (first, second):
        assert (
            main(
                [
                    "act",
                    ROVER,
                    PROB_NOCALI,
                    "--strategy",
                    f"script:{CHOICES}",
                    "--out",
                    str(out),
                ]
            )
            == 0
        )
    assert first.read_bytes() == second.read_bytes()


def test_act_blocked_problem_exits_2(tmp_path):
    problem = tmp_path / "stuck.prob"
    problem.write_text("problem stuck\nstate: lowCharge, raw\ntasks:\n  B: monitor\n")
    code = main(["act", ROVER, str(problem), "--out", str(tmp_path / "t.txt")])
    assert code == 2


def test_act_budget_exhaustion_exits_3(tmp_path):
    code = main(
        [
            "act",
            ROVER,
            PROB_NOCALI,
            "--max-steps",
            "2",
            "--out",
            str(tmp_path / "t.txt"),
        ]
    )
    assert code == 3


def test_act_invalid_domain_exits_4(tmp_path, capsys):
    bad = tmp_path / "bad.htn"
    bad.write_text(
        "domain bad\noperator a\n  pre:\n  add:\n  del:\n"
        "method m g\n  tasks:\n    1: a\n  constraints:\n"
    )
    code = main(["act", str(bad), PROB_NOCALI])
    assert code == 4
    err = capsys.readouterr().err
    assert "body-size" in err


def test_act_missing_file_exits_4():
    assert main(["act", "nowhere.htn", PROB_NOCALI]) == 4


def test_plan_lists_the_solution(capsys):
    code = main(["plan", ROVER, PROB_NOCALI, "--depth", "4"])
    assert code == 0
    out = capsys.readouterr().out
    assert "solutions: 1" in out
    assert "monitor . estabConn . extData(loc1) . sendExtData(loc1) . breakConn" in out
    assert "calibrate" not in out


def test_plan_depth_zero_is_an_input_error(capsys):
    assert main(["plan", ROVER, PROB_NOCALI, "--depth", "0"]) == 4


def test_verify_acting_only(capsys):
    code = main(["verify", ROVER, PROB_NOCALI, "--suite", "acting-only"])
    assert code == 0
    out = capsys.readouterr().out
    assert "PASS" in out
    assert "8 . 9 . B . 1 . 4 . 5 . 3" in out


def test_verify_jumps(capsys):
    code = main(
        [
            "verify",
            ROVER_JUMP,
            PROB_NOCALI,
            "--suite",
            "jumps",
            "--target",
            WALKTHROUGH_TARGET,
        ]
    )
    assert code == 0
    assert "PASS" in capsys.readouterr().out


def test_verify_jumps_requires_target(capsys):
    assert main(["verify", ROVER_JUMP, PROB_NOCALI, "--suite", "jumps"]) == 4


def test_verify_equivalence_small_corpus(capsys):
    code = main(["verify", "--suite", "equivalence", "--count", "5"])
    assert code == 0
    assert "PASS (5 checks)" in capsys.readouterr().out


def test_verify_dtrace_on_walkthrough(capsys):
    code = main(
        ["verify", ROVER, PROB_NOCALI, EVT, "--suite", "dtrace-soundness"]
    )
    assert code == 0
    assert "PASS" in capsys.readouterr().out


def test_verify_failure_exits_5(capsys):
    # the plain rover fixture admits no jump on this target, so the jumps
    # suite reports a failure
    code = main(
        [
            "verify",
            ROVER,
            PROB_NOCALI,
            "--suite",
            "jumps",
            "--target",
            "monitor . estabConn . extData(loc1) . sendExtData(loc1) . breakConn",
        ]
    )
    assert code == 5
    assert "FAIL" in capsys.readouterr().out


def test_act_interactive_reads_tasks_from_stdin(tmp_path, monkeypatch, capsys):
    lines = iter(["transmitData(loc1), monitor", ""])

    def fake_input(prompt=""):
        try:
            return next(lines)
        except StopIteration:
            raise EOFError

    monkeypatch.setattr("builtins.input", fake_input)
    out = tmp_path / "trace.txt"
    code = main(["act", ROVER, PROB, "--interactive", "--out", str(out)])
    assert code == 0
    text = out.read_text()
    assert "kind: observation" in text
    assert "classification: successful" in text
