import json

import pytest

from rrqc import cli
from rrqc.cli import (
    EXIT_CHECK_FAILED,
    EXIT_OK,
    EXIT_USAGE,
    main,
    parse_complex,
    resolve_messages,
)


def run_json(tmp_path, args, name="report.json"):
    path = tmp_path / name
    code = main(args + ["--format", "json", "--output", str(path)])
    return code, json.loads(path.read_text())


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def test_parse_complex_literals():
    assert parse_complex("0.6") == 0.6
    assert parse_complex("0.8i") == 0.8j
    assert parse_complex("-0.3+0.2i") == -0.3 + 0.2j
    with pytest.raises(cli.UsageError):
        parse_complex("nope")


def test_resolve_messages_literal_and_haar():
    (msg,) = resolve_messages("0.6,0.8i", seed=0)
    assert msg.alpha == 0.6 and msg.beta == 0.8j
    drawn = resolve_messages("HAAR(5)", seed=7)
    assert len(drawn) == 5
    assert drawn == resolve_messages("HAAR(5)", seed=7)
    with pytest.raises(cli.UsageError):
        resolve_messages("1,2,3", seed=0)
    with pytest.raises(cli.UsageError):
        resolve_messages("0,0", seed=0)


def test_resolve_messages_normalizes_with_warning(capsys):
    (msg,) = resolve_messages("3,4", seed=0)
    assert abs(abs(msg.alpha) ** 2 + abs(msg.beta) ** 2 - 1.0) < 1e-12
    assert "normalizing" in capsys.readouterr().err


def test_usage_errors_exit_one(capsys):
    assert main(["protocol", "--variant", "bogus", "--n", "2"]) == EXIT_USAGE
    assert main(["nope"]) == EXIT_USAGE
    assert main(["protocol", "--variant", "switch", "--n", "9"]) == EXIT_USAGE
    assert main(["eb-check", "--weights", "1,1,1,1"]) == EXIT_USAGE
    capsys.readouterr()


# ---------------------------------------------------------------------------
# protocol command
# ---------------------------------------------------------------------------


def test_protocol_switch_all_targets(tmp_path):
    code, report = run_json(
        tmp_path,
        ["protocol", "--variant", "switch", "--n", "3", "--x", "ALL", "--message", "0.6,0.8i"],
    )
    assert code == EXIT_OK
    assert report["schema_version"] == 1
    assert report["summary"]["passed"] is True
    assert report["summary"]["min_fidelity"] >= 1 - 1e-9
    assert report["summary"]["cases"] == 3
    xs = {rec["x"] for rec in report["records"]}
    assert xs == {1, 2, 3}
    assert report["records"][0]["alpha"] == [0.6, 0.0]
    assert report["records"][0]["beta"] == [0.0, 0.8]


def test_protocol_noiseless_trivial(tmp_path):
    code, report = run_json(
        tmp_path,
        ["protocol", "--variant", "noiseless", "--n", "2", "--x", "1", "--message", "1,0"],
    )
    assert code == EXIT_OK
    assert all(rec["fidelity"] >= 1 - 1e-9 for rec in report["records"])


def test_protocol_baseline_haar_mean(tmp_path):
    code, report = run_json(
        tmp_path,
        [
            "protocol",
            "--variant",
            "baseline",
            "--n",
            "2",
            "--x",
            "1",
            "--message",
            "HAAR(400)",
            "--seed",
            "7",
        ],
    )
    assert code == EXIT_OK  # informational: baseline has no pass criterion
    assert report["summary"]["passed"] is None
    assert abs(report["summary"]["mean_fidelity"] - 2 / 3) < 0.05


def test_protocol_transcript_events(tmp_path):
    code, report = run_json(
        tmp_path,
        [
            "protocol",
            "--variant",
            "controlled-ops",
            "--n",
            "3",
            "--x",
            "1",
            "--message",
            "1,0",
            "--transcript",
        ],
    )
    assert code == EXIT_OK
    flagged = [
        e
        for e in report["records"][0]["transcript"]
        if e["type"] == "nonlocal-operation"
    ]
    assert len(flagged) == 2
    assert all(e["flagged"] for e in flagged)


# ---------------------------------------------------------------------------
# validator / scans / eb-check
# ---------------------------------------------------------------------------


def test_validate_switch_command(tmp_path):
    code, report = run_json(
        tmp_path, ["validate-switch", "--n", "2", "--trials", "25", "--seed", "1"]
    )
    assert code == EXIT_OK
    assert report["summary"]["passed"] is True
    assert report["summary"]["max_deviation"] < 1e-9
    assert len([r for r in report["records"] if r["kind"] == "two-party"]) == 25


def test_nogo_scan_exit_codes(tmp_path):
    code_odd, report_odd = run_json(tmp_path, ["nogo-scan", "--n", "3"], "odd.json")
    assert code_odd == EXIT_OK
    assert report_odd["summary"]["counterexamples"] == 0
    code_even, report_even = run_json(tmp_path, ["nogo-scan", "--n", "2"], "even.json")
    assert code_even == EXIT_OK  # even n is expected to produce counterexamples
    assert report_even["summary"]["counterexamples"] >= 1


def test_eb_check_verdicts(tmp_path):
    code, report = run_json(tmp_path, ["eb-check", "--weights", "0,0.5,0.5,0"])
    assert code == EXIT_OK
    assert report["summary"]["entanglement_breaking"] is True
    code, report = run_json(tmp_path, ["eb-check", "--weights", "1,0,0,0"], "id.json")
    assert report["summary"]["entanglement_breaking"] is False
    assert abs(report["summary"]["witness"] + 0.5) < 1e-9


def test_eb_check_expectation_failure_exits_two(tmp_path):
    path = tmp_path / "fail.json"
    code = main(
        [
            "eb-check",
            "--weights",
            "1,0,0,0",
            "--expect",
            "eb",
            "--format",
            "json",
            "--output",
            str(path),
        ]
    )
    assert code == EXIT_CHECK_FAILED


def test_validity_violations_exit_three(monkeypatch, capsys):
    def boom(cfg):
        raise cli.ValidityError("synthetic violation")

    monkeypatch.setitem(cli.COMMANDS, "nogo-scan", boom)
    assert main(["nogo-scan", "--n", "3"]) == cli.EXIT_VALIDITY
    assert "numerical validity violation" in capsys.readouterr().err


def test_baseline_sweep_command(tmp_path):
    code, report = run_json(
        tmp_path,
        ["baseline-sweep", "--n", "2", "--count", "400", "--seed", "3"],
    )
    assert code == EXIT_OK
    assert report["summary"]["passed"] is True
    assert abs(report["summary"]["plus_fidelity"] - 0.5) < 1e-9


# ---------------------------------------------------------------------------
# report formats and determinism
# ---------------------------------------------------------------------------


def test_json_reports_are_byte_identical_for_same_config(tmp_path):
    args = [
        "protocol",
        "--variant",
        "switch",
        "--n",
        "2",
        "--x",
        "ALL",
        "--message",
        "HAAR(3)",
        "--seed",
        "5",
        "--format",
        "json",
    ]
    first = tmp_path / "a.json"
    second = tmp_path / "b.json"
    assert main(args + ["--output", str(first)]) == EXIT_OK
    assert main(args + ["--output", str(second)]) == EXIT_OK
    assert first.read_bytes() == second.read_bytes()


def test_report_embeds_seed_and_tolerance(tmp_path):
    _, report = run_json(
        tmp_path, ["validate-switch", "--n", "1", "--trials", "1", "--seed", "9"]
    )
    assert report["config"]["seed"] == 9
    assert report["config"]["tolerance"] == 1e-9
    assert report["summary"]["tolerance"] == 1e-9


def test_csv_report_has_fixed_header(tmp_path):
    path = tmp_path / "report.csv"
    code = main(
        [
            "protocol",
            "--variant",
            "noiseless",
            "--n",
            "2",
            "--x",
            "1",
            "--message",
            "1,0",
            "--format",
            "csv",
            "--output",
            str(path),
        ]
    )
    assert code == EXIT_OK
    lines = path.read_text().splitlines()
    assert lines[0] == ",".join(cli.CSV_COLUMNS)
    assert len(lines) == 3  # header + one row per branch


def test_text_report_prints_summary(capsys):
    code = main(
        ["protocol", "--variant", "noiseless", "--n", "2", "--x", "1", "--message", "1,0"]
    )
    assert code == EXIT_OK
    out = capsys.readouterr().out
    assert "summary:" in out
    assert "min_fidelity" in out
