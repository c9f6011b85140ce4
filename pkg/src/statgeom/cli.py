"""Command-line runner: ``verify``, ``list-checks``, ``emit-examples``.

Exit codes: 0 all checks pass, 1 at least one check fails, 2 load or
evaluation error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from .catalog import CHECKS, catalog_text
from .checks import run_scenario
from .report import CheckReport, RunReport
from .scenarios import BUNDLED_IDS, ScenarioError, bundled_scenario, emit_examples, load_scenario, validate_scenario

EXIT_PASS, EXIT_FAIL, EXIT_ERROR = 0, 1, 2


class _ArgError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on its own, which matches our error code,
    # but raising keeps main() the single exit point
    def error(self, message):
        raise _ArgError(message)


# ---------------------------------------------------------------- JSON


def _fmt_float(v: float) -> str:
    if math.isnan(v):
        return '"NaN"'
    if math.isinf(v):
        return '"Infinity"' if v > 0 else '"-Infinity"'
    return format(v, ".17g")


def _to_json(obj, indent: int = 0) -> str:
    """Deterministic JSON with floats at 17 significant digits."""
    pad, pad1 = "  " * indent, "  " * (indent + 1)
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, np.ndarray):
        return _to_json(obj.tolist(), indent)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad1}{_to_json(str(k))}: {_to_json(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float, np.integer, np.floating)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(_to_json(v) for v in obj) + "]"
        return "[\n" + ",\n".join(pad1 + _to_json(v, indent + 1) for v in obj) + "\n" + pad + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def check_to_dict(c: CheckReport) -> dict:
    d = {
        "name": c.name,
        "max_residual": c.max_residual,
        "tolerance": c.tolerance,
        "verdict": c.verdict,
        "points": [{"x": [float(v) for v in x], "residual": float(r)} for x, r in zip(c.points, c.residuals)],
        "components": dict(c.components),
    }
    if c.reason is not None:
        d["reason"] = c.reason
    if c.details:
        d["details"] = c.details
    return d


def report_to_dict(r: RunReport) -> dict:
    return {
        "scenario": r.scenario,
        "version": r.version,
        "seed": r.seed,
        "checks": [check_to_dict(c) for c in r.checks],
        "overall": r.overall,
    }


def report_json(r: RunReport) -> str:
    return _to_json(report_to_dict(r)) + "\n"


def report_text(r: RunReport) -> str:
    lines = [f"scenario {r.scenario}  version {r.version}  seed {r.seed}"]
    for c in r.checks:
        line = f"  {c.verdict.upper():7s} {c.name:24s} max {c.max_residual:.3e}  tol {c.tolerance:.1e}"
        if c.reason:
            line += f"  ({c.reason})"
        lines.append(line)
    lines.append(f"overall {r.overall.upper()}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- commands


def _parser() -> _Parser:
    p = _Parser(prog="statgeom", description="Verify statistical-manifold scenarios at sampled points.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    v = sub.add_parser("verify", help="run a scenario's checks")
    v.add_argument("scenario", nargs="?", help="scenario file (JSON)")
    v.add_argument("--bundled", metavar="ID", help=f"bundled example ({', '.join(BUNDLED_IDS)})")
    v.add_argument("--tol", type=float, help="tolerance for every check")
    v.add_argument("--check", action="append", dest="checks", metavar="NAME", help="run this check (repeatable)")
    v.add_argument("--report", choices=("text", "json"), default="text")
    v.add_argument("--points", type=int, metavar="N", help="use N seeded random sample points")
    v.add_argument("--seed", type=int, metavar="S", help="sample seed")
    sub.add_parser("list-checks", help="print the check catalog")
    e = sub.add_parser("emit-examples", help="write the bundled scenarios as files")
    e.add_argument("directory")
    return p


def cmd_verify(args, out, err) -> int:
    if (args.scenario is None) == (args.bundled is None):
        err.write("error: give exactly one of a scenario file or --bundled ID\n")
        return EXIT_ERROR
    try:
        if args.bundled is not None:
            sc = bundled_scenario(args.bundled)
        else:
            sc = load_scenario(Path(args.scenario))
    except KeyError as exc:
        err.write(f"error: {exc.args[0]}\n")
        return EXIT_ERROR
    except ScenarioError as exc:
        err.write(f"error: {exc}\n")
        return EXIT_ERROR
    except OSError as exc:
        err.write(f"error: cannot read scenario: {exc}\n")
        return EXIT_ERROR
    diags = validate_scenario(sc)
    if diags:
        for d in diags:
            err.write(f"error: {d}\n")
        return EXIT_ERROR
    for name in args.checks or ():
        if name not in CHECKS:
            err.write(f"error: unknown check {name!r}\n")
            return EXIT_ERROR
    if args.tol is not None and not (args.tol > 0 and math.isfinite(args.tol)):
        err.write("error: --tol must be a positive number\n")
        return EXIT_ERROR
    if args.points is not None and args.points < 1:
        err.write("error: --points must be positive\n")
        return EXIT_ERROR
    try:
        report = run_scenario(sc, args.checks, args.tol, args.points, args.seed)
    except Exception as exc:  # evaluation errors are reported, never a traceback
        err.write(f"error: evaluation failed: {type(exc).__name__}: {exc}\n")
        return EXIT_ERROR
    out.write(report_json(report) if args.report == "json" else report_text(report))
    return EXIT_PASS if report.overall == "pass" else EXIT_FAIL


def cmd_list_checks(out) -> int:
    out.write(catalog_text())
    return EXIT_PASS


def cmd_emit_examples(args, out, err) -> int:
    try:
        for p in emit_examples(args.directory):
            out.write(f"{p}\n")
    except OSError as exc:
        err.write(f"error: {exc}\n")
        return EXIT_ERROR
    return EXIT_PASS


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = _parser().parse_args(argv)
    except _ArgError as exc:
        err.write(f"error: {exc}\n")
        return EXIT_ERROR
    if args.command == "verify":
        return cmd_verify(args, out, err)
    if args.command == "list-checks":
        return cmd_list_checks(out)
    return cmd_emit_examples(args, out, err)


if __name__ == "__main__":
    sys.exit(main())
