"""Command-line front end for protocols, validators, and scans.

Exit codes: 0 all checks pass, 1 usage error, 2 a check failed, 3 numerical
validity violation. Reports embed the seed and tolerance they ran with and
contain no wall-clock data, so JSON output is byte-identical for identical
(flags, seed) pairs; elapsed time goes to stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import re
import sys
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import __version__, channels, nogo, protocols, qswitch
from .protocols import (
    MessageState,
    OutcomePolicy,
    ProtocolResult,
    haar_message,
    run_controlled_ops_protocol,
    run_definite_order_baseline,
    run_noiseless_protocol,
    run_switch_protocol,
)
from .qcore import (
    ATOL,
    MAX_RECEIVERS,
    CompletenessError,
    DimensionMismatchError,
    ValidityError,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CHECK_FAILED = 2
EXIT_VALIDITY = 3

SCHEMA_VERSION = 1

PROTOCOL_RUNNERS = {
    "noiseless": run_noiseless_protocol,
    "switch": run_switch_protocol,
    "baseline": run_definite_order_baseline,
    "controlled-ops": run_controlled_ops_protocol,
}
#: Variants whose every branch must reach fidelity 1.
PERFECT_VARIANTS = ("noiseless", "switch", "controlled-ops")

CSV_COLUMNS = (
    "command",
    "case",
    "branch",
    "n",
    "x",
    "variant",
    "kind",
    "detail",
    "alpha",
    "beta",
    "outcomes",
    "probability",
    "fidelity",
    "deviation",
    "witness",
    "tau",
    "bits",
    "fixed_index",
    "entanglement_breaking",
    "passed",
)

CSV_HELP = (
    "CSV reports emit one row per (case, branch) with the fixed columns: "
    + ", ".join(CSV_COLUMNS)
    + ". Cells not applying to the command are left empty; structured cells "
    "(outcomes, complex amplitudes as [re, im]) are JSON-encoded."
)


class UsageError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse default exits with 2; usage errors are 1
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_USAGE)


def _cnum(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


def _x_value(text: str):
    if text.upper() == "ALL":
        return "ALL"
    try:
        return int(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"x must be an integer or ALL, got {text!r}") from exc


def parse_complex(token: str) -> complex:
    """Parse a complex literal like '0.6', '0.8i', '-0.3+0.2i'."""
    cleaned = token.strip().replace("i", "j")
    if not cleaned:
        raise UsageError("empty complex literal")
    try:
        value = complex(cleaned)
    except ValueError as exc:
        raise UsageError(f"bad complex literal {token!r}") from exc
    if not (math.isfinite(value.real) and math.isfinite(value.imag)):
        raise UsageError(f"non-finite complex literal {token!r}")
    return value


_HAAR_RE = re.compile(r"^HAAR\((\d+)\)$", re.IGNORECASE)


def resolve_messages(text: str, seed: int) -> list[MessageState]:
    """Turn a message flag into concrete states.

    Accepts 'alpha,beta' complex literals (auto-normalized with a warning when
    the norm is off by more than 1e-6) or 'HAAR(count)' for seeded random
    draws.
    """
    haar = _HAAR_RE.match(text.strip())
    if haar:
        count = int(haar.group(1))
        if count <= 0:
            raise UsageError("HAAR count must be positive")
        rng = np.random.default_rng(seed)
        return [haar_message(rng) for _ in range(count)]
    parts = text.split(",")
    if len(parts) != 2:
        raise UsageError(f"message must be 'alpha,beta' or 'HAAR(count)', got {text!r}")
    alpha, beta = (parse_complex(p) for p in parts)
    norm = abs(alpha) ** 2 + abs(beta) ** 2
    if norm < 1e-12:
        raise UsageError("message amplitudes are both zero")
    if abs(norm - 1.0) > 1e-6:
        sys.stderr.write(f"warning: normalizing message with squared norm {norm:.6g}\n")
    scale = math.sqrt(norm)
    return [MessageState(alpha / scale, beta / scale)]


@dataclass
class RunConfig:
    command: str
    n: int | None = None
    x: int | str | None = None
    message: str | None = None
    variant: str | None = None
    seed: int = 0
    tolerance: float = ATOL
    trials: int | None = None
    weights: str | None = None
    expect: str | None = None
    count: int | None = None
    mean_tolerance: float | None = None
    transcript: bool = False
    output: str | None = None
    format: str = "text"

    def echo(self) -> dict:
        # presentation flags (output path, format) stay out: the report must
        # be byte-identical for identical computational configs
        return {
            "command": self.command,
            "n": self.n,
            "x": self.x,
            "message": self.message,
            "variant": self.variant,
            "seed": self.seed,
            "tolerance": self.tolerance,
            "trials": self.trials,
            "weights": self.weights,
            "expect": self.expect,
            "count": self.count,
            "mean_tolerance": self.mean_tolerance,
            "transcript": self.transcript,
        }


@dataclass
class Report:
    config: dict
    records: list[dict]
    summary: dict
    schema_version: int = SCHEMA_VERSION
    version: str = field(default=__version__)

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "version": self.version,
            "config": self.config,
            "records": self.records,
            "summary": self.summary,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for record in self.records:
            row = []
            for column in CSV_COLUMNS:
                value = record.get(column, "")
                if isinstance(value, (dict, list)):
                    value = json.dumps(value, sort_keys=True)
                elif value is None:
                    value = ""
                row.append(value)
            writer.writerow(row)
        return buffer.getvalue()

    def to_text(self, max_records: int = 20) -> str:
        lines = [f"command: {self.config['command']}"]
        for key, value in self.config.items():
            if key != "command" and value is not None:
                lines.append(f"  {key}: {value}")
        lines.append(f"records: {len(self.records)}")
        for record in self.records[:max_records]:
            body = ", ".join(
                f"{k}={json.dumps(v, sort_keys=True) if isinstance(v, (dict, list)) else v}"
                for k, v in record.items()
                if k not in ("command", "transcript") and v is not None
            )
            lines.append(f"  - {body}")
        if len(self.records) > max_records:
            lines.append(f"  ... ({len(self.records) - max_records} more)")
        lines.append("summary:")
        for key, value in self.summary.items():
            lines.append(f"  {key}: {value}")
        return "\n".join(lines) + "\n"

    def render(self, fmt: str) -> str:
        if fmt == "json":
            return self.to_json()
        if fmt == "csv":
            return self.to_csv()
        return self.to_text()


def _event_dict(event) -> dict:
    if isinstance(event, protocols.LocalUnitary):
        return {
            "type": "local-unitary",
            "party": str(event.party.id),
            "factors": list(event.factors),
            "gate": event.label,
        }
    if isinstance(event, protocols.LocalMeasurement):
        return {
            "type": "local-measurement",
            "party": str(event.party.id),
            "factors": list(event.factors),
            "basis": event.basis,
            "outcome": event.outcome,
        }
    if isinstance(event, protocols.ClassicalMessage):
        return {
            "type": "classical-message",
            "from": str(event.sender),
            "to": str(event.recipient),
            "bits": list(event.bits),
        }
    return {
        "type": "nonlocal-operation",
        "actor": str(event.actor),
        "factors": list(event.factors),
        "gate": event.label,
        "flagged": event.flagged,
    }


def _protocol_records(
    cfg: RunConfig, case: int, x: int, msg: MessageState, result: ProtocolResult
) -> list[dict]:
    records = []
    for bi, branch in enumerate(result.branches):
        record = {
            "command": cfg.command,
            "variant": cfg.variant,
            "case": case,
            "branch": bi,
            "n": cfg.n,
            "x": x,
            "alpha": _cnum(msg.alpha),
            "beta": _cnum(msg.beta),
            "outcomes": dict(sorted(branch.outcomes.items())),
            "probability": float(branch.probability),
            "fidelity": float(branch.fidelity),
        }
        if cfg.transcript:
            record["transcript"] = [_event_dict(e) for e in branch.transcript.events]
        records.append(record)
    return records


def cmd_protocol(cfg: RunConfig) -> Report:
    if cfg.variant not in PROTOCOL_RUNNERS:
        raise UsageError(f"unknown protocol variant {cfg.variant!r}")
    if cfg.n is None or not 1 <= cfg.n <= MAX_RECEIVERS:
        raise UsageError(f"--n must be in 1..{MAX_RECEIVERS}")
    xs = list(range(1, cfg.n + 1)) if cfg.x == "ALL" else [int(cfg.x)]
    if any(not 1 <= x <= cfg.n for x in xs):
        raise UsageError(f"--x must be in 1..{cfg.n} or ALL")
    messages = resolve_messages(cfg.message or "HAAR(1)", cfg.seed)
    policy = (
        OutcomePolicy.exhaustive() if cfg.n <= 4 else OutcomePolicy.sample(cfg.seed)
    )
    runner = PROTOCOL_RUNNERS[cfg.variant]
    records = []
    fidelities = []
    case = 0
    for x in xs:
        for msg in messages:
            result = runner(msg, cfg.n, x, policy)
            records.extend(_protocol_records(cfg, case, x, msg, result))
            fidelities.append(result.fidelity)
            case += 1
    branch_fids = [r["fidelity"] for r in records]
    summary = {
        "cases": case,
        "branches": len(records),
        "min_fidelity": min(branch_fids),
        "mean_fidelity": sum(fidelities) / len(fidelities),
        "max_fidelity": max(branch_fids),
        "tolerance": cfg.tolerance,
    }
    if cfg.variant in PERFECT_VARIANTS:
        summary["passed"] = bool(summary["min_fidelity"] >= 1.0 - cfg.tolerance)
    else:
        summary["passed"] = None  # baseline runs are informational
    return Report(cfg.echo(), records, summary)


def cmd_validate_switch(cfg: RunConfig) -> Report:
    ns = (1, 2, 3) if cfg.n is None else (cfg.n,)
    if any(not 1 <= n <= 3 for n in ns):
        raise UsageError("--n must be in 1..3 for generic-switch validation")
    trials = 20 if cfg.trials is None else cfg.trials
    if trials < 0:
        raise UsageError("--trials must be non-negative")
    result = qswitch.validate_closed_forms(cfg.seed, trials, ns, cfg.tolerance)
    records = [
        {
            "command": cfg.command,
            "kind": rec.kind,
            "n": rec.n,
            "detail": rec.detail,
            "deviation": rec.deviation,
        }
        for rec in result.records
    ]
    summary = {
        "comparisons": len(records),
        "max_deviation": result.max_deviation,
        "tolerance": result.tolerance,
        "passed": result.passed,
    }
    return Report(cfg.echo(), records, summary)


def cmd_nogo_scan(cfg: RunConfig) -> Report:
    if cfg.n is None or not nogo.SCAN_MIN <= cfg.n <= nogo.SCAN_MAX:
        raise UsageError(f"--n must be in {nogo.SCAN_MIN}..{nogo.SCAN_MAX}")
    report = nogo.fixed_bit_scan(cfg.n)
    records = [
        {
            "command": cfg.command,
            "n": cfg.n,
            "tau": list(ce.pair.tau),
            "bits": list(ce.bits),
            "fixed_index": ce.index,
        }
        for ce in report.counterexamples
    ]
    odd = cfg.n % 2 == 1
    passed = report.counterexample_count == 0 if odd else report.counterexample_count > 0
    summary = {
        "cells": report.cells,
        "witnessed": report.witnessed,
        "counterexamples": report.counterexample_count,
        "parity": "odd" if odd else "even",
        "passed": passed,
    }
    return Report(cfg.echo(), records, summary)


def cmd_eb_check(cfg: RunConfig) -> Report:
    if cfg.weights is None:
        raise UsageError("--weights wI,wX,wY,wZ is required")
    try:
        weights = [float(w) for w in cfg.weights.split(",")]
    except ValueError as exc:
        raise UsageError(f"bad weights {cfg.weights!r}") from exc
    if len(weights) != 4:
        raise UsageError("exactly four weights are required")
    total = sum(weights)
    if abs(total - 1.0) > 1e-9 or any(w < 0 for w in weights):
        raise UsageError(f"weights must be non-negative and sum to 1, got {weights}")
    weights = [w / total for w in weights]
    channel = channels.PauliChannel(*weights)
    verdict = channels.is_entanglement_breaking_qubit(
        channels.choi(channels.pauli_kraus(channel))
    )
    records = [
        {
            "command": cfg.command,
            "kind": "eb-check",
            "detail": cfg.weights,
            "entanglement_breaking": verdict.entanglement_breaking,
            "witness": verdict.witness,
        }
    ]
    passed = None
    if cfg.expect is not None:
        passed = verdict.entanglement_breaking == (cfg.expect == "eb")
    summary = {
        "entanglement_breaking": verdict.entanglement_breaking,
        "witness": verdict.witness,
        "expect": cfg.expect,
        "passed": passed,
    }
    return Report(cfg.echo(), records, summary)


def cmd_baseline_sweep(cfg: RunConfig) -> Report:
    n = 2 if cfg.n is None else cfg.n
    if not 1 <= n <= MAX_RECEIVERS:
        raise UsageError(f"--n must be in 1..{MAX_RECEIVERS}")
    x = 1 if cfg.x in (None, "ALL") else int(cfg.x)
    if not 1 <= x <= n:
        raise UsageError(f"--x must be in 1..{n}")
    count = 2000 if cfg.count is None else cfg.count
    if count <= 0:
        raise UsageError("--count must be positive")
    mean_tol = 0.01 if cfg.mean_tolerance is None else cfg.mean_tolerance
    rng = np.random.default_rng(cfg.seed)
    records = []
    fidelities = []
    for case in range(count):
        msg = haar_message(rng)
        result = run_definite_order_baseline(msg, n, x, OutcomePolicy.sample(cfg.seed))
        fidelities.append(result.fidelity)
        records.append(
            {
                "command": cfg.command,
                "case": case,
                "n": n,
                "x": x,
                "alpha": _cnum(msg.alpha),
                "beta": _cnum(msg.beta),
                "fidelity": float(result.fidelity),
            }
        )
    plus = run_definite_order_baseline(MessageState.plus(), n, x)
    mean = sum(fidelities) / len(fidelities)
    summary = {
        "count": count,
        "mean_fidelity": mean,
        "target_mean": 2.0 / 3.0,
        "mean_tolerance": mean_tol,
        "plus_fidelity": plus.fidelity,
        "target_plus": 0.5,
        "tolerance": cfg.tolerance,
        "passed": bool(
            abs(mean - 2.0 / 3.0) <= mean_tol
            and abs(plus.fidelity - 0.5) <= cfg.tolerance
        ),
    }
    return Report(cfg.echo(), records, summary)


COMMANDS = {
    "protocol": cmd_protocol,
    "validate-switch": cmd_validate_switch,
    "nogo-scan": cmd_nogo_scan,
    "eb-check": cmd_eb_check,
    "baseline-sweep": cmd_baseline_sweep,
}


def build_parser() -> _Parser:
    parser = _Parser(prog="rrqc", description=__doc__, epilog=CSV_HELP)
    parser.add_argument("--version", action="version", version=f"rrqc {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p: argparse.ArgumentParser):
        p.add_argument("--seed", type=int, default=0, help="RNG seed (default 0)")
        p.add_argument(
            "--tolerance", type=float, default=ATOL, help=f"check tolerance (default {ATOL})"
        )
        p.add_argument("--output", help="write the report to this path instead of stdout")
        p.add_argument(
            "--format", choices=("json", "csv", "text"), default="text", help="report format"
        )

    p = sub.add_parser("protocol", help="run a communication protocol", epilog=CSV_HELP)
    p.add_argument(
        "--variant", required=True, choices=sorted(PROTOCOL_RUNNERS), help="protocol to run"
    )
    p.add_argument("--n", type=int, required=True, help="receiver count")
    p.add_argument("--x", type=_x_value, default="ALL", help="target receiver or ALL")
    p.add_argument(
        "--message",
        default="HAAR(1)",
        help="message as 'alpha,beta' complex literals or HAAR(count)",
    )
    p.add_argument(
        "--transcript", action="store_true", help="include full transcripts in the report"
    )
    common(p)

    p = sub.add_parser(
        "validate-switch",
        help="compare closed-form switched channels against the generic construction",
        epilog=CSV_HELP,
    )
    p.add_argument("--n", type=int, help="restrict to one receiver count (1..3)")
    p.add_argument("--trials", type=int, help="random draws per comparison (default 20)")
    common(p)

    p = sub.add_parser(
        "nogo-scan", help="exhaustive fixed-bit scan over routings", epilog=CSV_HELP
    )
    p.add_argument("--n", type=int, required=True, help="carrier count (2..7)")
    common(p)

    p = sub.add_parser(
        "eb-check", help="certify entanglement breaking for a Pauli channel", epilog=CSV_HELP
    )
    p.add_argument("--weights", required=True, help="four weights wI,wX,wY,wZ")
    p.add_argument(
        "--expect",
        choices=("eb", "not-eb"),
        help="fail (exit 2) when the verdict differs from this expectation",
    )
    common(p)

    p = sub.add_parser(
        "baseline-sweep",
        help="Haar-average fidelity of the definite-order baseline",
        epilog=CSV_HELP,
    )
    p.add_argument("--n", type=int, help="receiver count (default 2)")
    p.add_argument("--x", type=_x_value, help="target receiver (default 1)")
    p.add_argument("--count", type=int, help="number of Haar samples (default 2000)")
    p.add_argument(
        "--mean-tolerance",
        type=float,
        help="allowed deviation of the Haar mean from 2/3 (default 0.01)",
    )
    common(p)

    return parser


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    fields = {
        key: getattr(args, key.replace("-", "_"))
        for key in (
            "command",
            "n",
            "x",
            "message",
            "variant",
            "seed",
            "tolerance",
            "trials",
            "weights",
            "expect",
            "count",
            "mean_tolerance",
            "transcript",
            "output",
            "format",
        )
        if hasattr(args, key.replace("-", "_"))
    }
    return RunConfig(**fields)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    cfg = _config_from_args(args)
    started = time.perf_counter()
    try:
        report = COMMANDS[cfg.command](cfg)
    except UsageError as exc:
        sys.stderr.write(f"rrqc: error: {exc}\n")
        return EXIT_USAGE
    except (ValidityError, CompletenessError, DimensionMismatchError, protocols.LocalityError) as exc:
        sys.stderr.write(f"rrqc: numerical validity violation: {exc}\n")
        return EXIT_VALIDITY
    elapsed = time.perf_counter() - started
    rendered = report.render(cfg.format)
    if cfg.output:
        with open(cfg.output, "w", encoding="utf-8") as handle:
            handle.write(rendered)
    else:
        sys.stdout.write(rendered)
    sys.stderr.write(f"elapsed {elapsed:.3f}s\n")
    passed = report.summary.get("passed")
    return EXIT_OK if passed in (None, True) else EXIT_CHECK_FAILED


if __name__ == "__main__":
    sys.exit(main())
