"""Command-line entry point: compute, verify and compare completion reports.

Exit codes: 0 pass, 1 a check failed, 2 usage or spec error.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import matrix as mx
from .arith import RingError
from .lattice import SpecError, parse_spec
from .pipeline import DEFAULT_BUDGET, canonical_json, compare_reports, compute, format_text, verify_report
from .series import SeriesError

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _load_json(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path} is not valid JSON: {exc}") from exc


def _emit(text: str, path: str | None) -> None:
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_compute(args) -> int:
    if args.degree < 2:
        raise UsageError("--degree must be at least 2")
    spec = parse_spec(_load_json(args.input))
    report = compute(spec, args.degree, args.budget)
    _emit(canonical_json(report) if args.format == "json" else format_text(report), args.output)
    status, msgs = verify_report(report, recompute=False)
    for m in msgs:
        if m != "pass":
            print(m, file=sys.stderr)
    return status


def cmd_verify(args) -> int:
    report = _load_json(args.input)
    if not isinstance(report, dict):
        raise UsageError("a report must be a JSON object")
    status, msgs = verify_report(report)
    for m in msgs:
        print(m)
    return status


def cmd_compare(args) -> int:
    a = _load_json(args.a)
    b = _load_json(args.b)
    D = None
    if args.mode == "hom":
        if not args.matrix:
            raise UsageError("--mode hom needs --matrix")
        D = mx.from_json(_load_json(args.matrix))
    status, msgs = compare_reports(a, b, args.mode, D)
    for m in msgs:
        print(m)
    return status


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fgl-neron", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    c = sub.add_parser("compute", help="run the completion pipeline on a torus spec")
    c.add_argument("--input", required=True, help="torus spec JSON")
    c.add_argument("--degree", type=int, default=8, help="truncation degree N (default 8)")
    c.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="term budget for Phi-level checks")
    c.add_argument("--output", help="write the report here instead of stdout")
    c.add_argument("--format", choices=("json", "text"), default="json")
    c.set_defaults(func=cmd_compute)

    v = sub.add_parser("verify", help="recompute a report and compare")
    v.add_argument("--input", required=True)
    v.set_defaults(func=cmd_verify)

    m = sub.add_parser("compare", help="test whether two reported laws are isomorphic over the integers")
    m.add_argument("--a", required=True)
    m.add_argument("--b", required=True)
    m.add_argument("--mode", choices=("strong-iso", "hom"), default="strong-iso")
    m.add_argument("--matrix", help="JSON matrix D for --mode hom")
    m.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_PASS
    try:
        return args.func(args)
    except (UsageError, SpecError, RingError, SeriesError, KeyError, TypeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
