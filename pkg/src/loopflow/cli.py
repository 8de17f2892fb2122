"""Command-line interface for batch network analysis.

Reports are JSON by default so golden tests diff cleanly; --pretty renders
tables for humans. Exit codes: 0 success, 1 solver/analysis failure,
2 input error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .errors import AnalysisError, InputError
from .network import NetworkDocument, load_document
from .reports import (
    SUCCESS_TERMINATIONS,
    jsonsafe,
    run_basis,
    run_certify,
    run_node_demo,
    run_rate,
    run_solve,
    run_validate,
)
from .solver import DEFAULT_TOL_RESIDUAL, DEFAULT_TOL_STEP, Termination

# the single-pipe network used when node-demo is run without an input file
DEMO_DOCUMENT = {
    "nodes": [{"id": 1, "inflow": 0.0}, {"id": 2, "inflow": 0.0}],
    "edges": [{"id": 1, "from": 1, "to": 2, "mu": 1.0}],
}


def _positive(text: str) -> float:
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"must be > 0, got {text}")
    return value


def _at_least_one(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {text}")
    return value


def _parse_vector(text: str, flag: str) -> np.ndarray:
    """A flag value is a path to a JSON array, or the array written inline."""
    path = Path(text)
    try:
        if path.is_file():
            text = path.read_text()
    except OSError:
        pass
    try:
        data = json.loads(text)
    except json.JSONDecodeError:
        try:
            data = [float(part) for part in text.split(",") if part.strip()]
        except ValueError:
            raise InputError(f"{flag} must be a JSON array, comma-separated numbers, or a file path") from None
    if not isinstance(data, list) or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in data):
        raise InputError(f"{flag} must be a flat array of numbers")
    return np.array(data, dtype=float)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="loopflow",
        description="Analyze pipe networks: solve loop equations, certify convergence, estimate rates.",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    def add_common(p: argparse.ArgumentParser, input_required: bool = True):
        if input_required:
            p.add_argument("input", help="network document path ('-' for standard input)")
        else:
            p.add_argument("input", nargs="?", default=None,
                           help="network document path (default: built-in single-pipe demo)")
        p.add_argument("--output", metavar="PATH", help="write the report here instead of standard output")
        p.add_argument("--pretty", action="store_true", help="render tables instead of JSON")

    def add_solver_opts(p: argparse.ArgumentParser, with_method: bool = True):
        if with_method:
            p.add_argument("--method", choices=("nr", "hc"), default="nr")
        p.add_argument("--hc-mode", choices=("simultaneous", "sweep"), default="simultaneous")
        p.add_argument("--tol-residual", type=_positive, default=DEFAULT_TOL_RESIDUAL)
        p.add_argument("--tol-step", type=_positive, default=DEFAULT_TOL_STEP)
        p.add_argument("--max-iters", type=_at_least_one, default=None)
        p.add_argument("--x0", metavar="PATH|LIST", help="start vector (JSON array, comma list, or file)")

    p_validate = sub.add_parser("validate", help="structural checks on a network document")
    add_common(p_validate)

    p_basis = sub.add_parser("basis", help="cycle basis, edge-cycle matrix, face check")
    add_common(p_basis)

    p_solve = sub.add_parser("solve", help="run the loop solver and report the trace and flows")
    add_common(p_solve)
    add_solver_opts(p_solve)

    p_certify = sub.add_parser("certify", help="a-priori convergence certificate at the start vector")
    add_common(p_certify)
    p_certify.add_argument("--method", choices=("nr", "hc"), default="nr")
    p_certify.add_argument("--face-basis", action="store_true",
                           help="use the sharper constants valid for face bases")
    p_certify.add_argument("--x0", metavar="PATH|LIST")

    p_rate = sub.add_parser("rate", help="empirical convergence order for both methods")
    add_common(p_rate)
    add_solver_opts(p_rate, with_method=False)

    p_node = sub.add_parser("node-demo", help="Newton-on-pressures run showing the oscillation failure")
    add_common(p_node, input_required=False)
    p_node.add_argument("--p0", metavar="PATH|LIST", help="start pressures (default: 5 at vertex 1, 0 elsewhere)")
    p_node.add_argument("--tol-residual", type=_positive, default=DEFAULT_TOL_RESIDUAL)
    p_node.add_argument("--tol-step", type=_positive, default=DEFAULT_TOL_STEP)
    p_node.add_argument("--max-iters", type=_at_least_one, default=100)

    return parser


def _load_input(args) -> NetworkDocument:
    if getattr(args, "input", None) is None:
        return load_document(json.dumps(DEMO_DOCUMENT))
    if args.input == "-":
        return load_document(sys.stdin.read())
    path = Path(args.input)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InputError(f"cannot read {args.input}: {exc}") from exc
    return load_document(text)


def _emit(report: dict, args) -> None:
    if args.pretty:
        text = render_pretty(report)
    else:
        text = json.dumps(jsonsafe(report), indent=2)
    if args.output:
        Path(args.output).write_text(text + "\n")
    else:
        print(text)


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.10g}"
    return str(value)


def _table(headers: list[str], rows: list[list[str]]) -> list[str]:
    widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h) for i, h in enumerate(headers)]
    out = ["  ".join(h.ljust(w) for h, w in zip(headers, widths)).rstrip()]
    out.append("  ".join("-" * w for w in widths))
    for r in rows:
        out.append("  ".join(c.rjust(w) for c, w in zip(r, widths)).rstrip())
    return out


def render_pretty(report: dict) -> str:
    """Human-readable rendering of any report dict."""
    lines: list[str] = []
    command = report.get("command", "?")
    lines.append(f"== {command} ==")
    iterate_key = "iterates"
    scalar_skip = {"command", "iterates", "flows", "residual_norms", "step_norms",
                   "cycles", "edge_cycle_matrix", "methods"}
    for key, value in report.items():
        if key in scalar_skip:
            continue
        if isinstance(value, list):
            lines.append(f"{key}: [{', '.join(_fmt(v) for v in value)}]")
        else:
            lines.append(f"{key}: {_fmt(value)}")
    if "cycles" in report:
        for i, cycle in enumerate(report["cycles"], start=1):
            steps = " ".join(f"{'+' if s['dir'] > 0 else '-'}e{s['edge']}" for s in cycle)
            lines.append(f"cycle {i}: {steps}")
    if "methods" in report:
        for method, entry in report["methods"].items():
            lines.append(f"[{method}]")
            for key, value in entry.items():
                lines.append(f"  {key}: {_fmt(value)}")
    if iterate_key in report:
        headers = ["t"] + [f"x{i + 1}" for i in range(len(report[iterate_key][0]))] + ["residual", "step"]
        rows = []
        for t, x in enumerate(report[iterate_key]):
            step = report["step_norms"][t - 1] if t > 0 else None
            rows.append(
                [str(t)]
                + [_fmt(v) for v in x]
                + [_fmt(report["residual_norms"][t]), "" if step is None else _fmt(step)]
            )
        lines.extend(_table(headers, rows))
    return "\n".join(lines)


def _exit_code(report: dict) -> int:
    """1 when a solver-style report records a failure, else 0."""
    command = report.get("command")
    if command == "solve":
        return 0 if report.get("converged") else 1
    if command == "node-demo":
        ok = {t.value for t in SUCCESS_TERMINATIONS} | {Termination.OSCILLATING.value}
        return 0 if report.get("termination") in ok else 1
    if command == "rate":
        return 0 if all("error" not in entry for entry in report["methods"].values()) else 1
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        doc = _load_input(args)
        if args.command == "validate":
            report = run_validate(doc)
        elif args.command == "basis":
            report = run_basis(doc)
        elif args.command == "solve":
            report = run_solve(
                doc,
                method=args.method,
                hc_mode=args.hc_mode,
                tol_residual=args.tol_residual,
                tol_step=args.tol_step,
                max_iters=args.max_iters,
                x0=_parse_vector(args.x0, "--x0") if args.x0 else None,
            )
        elif args.command == "certify":
            report = run_certify(
                doc,
                method=args.method,
                basis_mode="face" if args.face_basis else "general",
                x0=_parse_vector(args.x0, "--x0") if args.x0 else None,
            )
        elif args.command == "rate":
            report = run_rate(
                doc,
                tol_residual=args.tol_residual,
                tol_step=args.tol_step,
                max_iters=args.max_iters,
                hc_mode=args.hc_mode,
                x0=_parse_vector(args.x0, "--x0") if args.x0 else None,
            )
        elif args.command == "node-demo":
            report = run_node_demo(
                doc,
                p0=_parse_vector(args.p0, "--p0") if args.p0 else None,
                tol_residual=args.tol_residual,
                tol_step=args.tol_step,
                max_iters=args.max_iters,
            )
        else:  # pragma: no cover - argparse rejects unknown commands
            parser.error(f"unknown command {args.command}")
    except InputError as exc:
        print(json.dumps({"error": exc.code, "message": str(exc)}), file=sys.stderr)
        return 2
    except AnalysisError as exc:
        print(json.dumps({"error": exc.code, "message": str(exc)}), file=sys.stderr)
        return 1
    _emit(report, args)
    return _exit_code(report)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
