"""Command-line interface: ``check``, ``validate``, ``refine`` and ``matrix``."""

from __future__ import annotations

import argparse
import sys
from enum import IntEnum
from typing import Optional, Sequence

from .conformance import Mode as ValidationMode
from .conformance import Report, ValidationOptions, validate
from .loading import load_instance_model, load_refinement_map, load_workspace
from .model import OntologyError, Workspace, check_ontology_wellformedness
from .refinement import Mode as RefinementMode
from .refinement import verify_refinement
from .reports import FORMATS, serialize_report
from .syntax import ParseError


class ExitCode(IntEnum):
    OK = 0
    VIOLATIONS = 1
    INPUT_ERROR = 2
    USAGE_ERROR = 3


class InputError(Exception):
    """Unreadable, unparsable or unresolvable input; maps to exit code 2."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(ExitCode.USAGE_ERROR, f"{self.prog}: error: {message}\n")


def _load(paths) -> Workspace:
    try:
        ws = load_workspace(paths)
    except OSError as exc:
        raise InputError(f"cannot read {exc.filename}: {exc.strerror}") from None
    except ParseError as exc:
        raise InputError(str(exc)) from None
    except ValueError as exc:
        raise InputError(str(exc)) from None
    missing = ws.missing_imports()
    if missing:
        raise InputError("\n".join(f"{a}: unresolved import {b}" for a, b in missing))
    return ws


def _wellformed(ws: Workspace) -> list:
    diags = []
    for ont in ws:
        diags.extend(check_ontology_wellformedness(ont, ws))
    diags.sort(key=lambda d: (d.code, d.subject, d.message))
    return diags


def _require_wellformed(ws: Workspace) -> None:
    diags = _wellformed(ws)
    if diags:
        lines = [f"{d.code} {d.subject}: {d.message}" for d in diags]
        raise InputError("ontology is not well-formed:\n" + "\n".join(lines))


def _emit(text: str) -> None:
    sys.stdout.write(text if text.endswith("\n") else text + "\n")


def cmd_check(args) -> ExitCode:
    ws = _load(args.ontologies)
    report = Report(tuple(_wellformed(ws)))
    _emit(serialize_report(report, args.format))
    print(f"check: {len(ws)} ontologies, {len(report.diagnostics)} diagnostics", file=sys.stderr)
    return ExitCode.OK if report.passed else ExitCode.VIOLATIONS


def cmd_validate(args) -> ExitCode:
    ws = _load(args.ontologies)
    _require_wellformed(ws)
    try:
        model = load_instance_model(args.instance)
    except OSError as exc:
        raise InputError(f"cannot read {exc.filename}: {exc.strerror}") from None
    except ParseError as exc:
        raise InputError(str(exc)) from None
    if model.conforms_to not in ws:
        raise InputError(f"{args.instance}: conforms to {model.conforms_to}, which is not loaded")
    mode = ValidationMode.PARTIAL if args.partial else ValidationMode.COMPLETE
    try:
        report = validate(model, ws, ValidationOptions(mode))
    except OntologyError as exc:
        raise InputError(f"{args.instance}: {exc}") from None
    _emit(serialize_report(report, args.format))
    print(f"validate: {model.name} ({mode.value}) {report.status}, "
          f"{len(report.diagnostics)} violations", file=sys.stderr)
    return ExitCode.OK if report.passed else ExitCode.VIOLATIONS


def _matrix(args):
    ws = _load([args.lower, args.upper])
    _require_wellformed(ws)
    try:
        rmap = load_refinement_map(args.map)
    except OSError as exc:
        raise InputError(f"cannot read {exc.filename}: {exc.strerror}") from None
    except ParseError as exc:
        raise InputError(str(exc)) from None
    mode = RefinementMode.STRICT if getattr(args, "strict", False) else RefinementMode.DEFAULT
    try:
        report = verify_refinement(rmap, ws, mode)
    except OntologyError as exc:
        raise InputError(f"{args.map}: {exc}") from None
    passed = sum(r.passed for r in report.rows)
    print(f"{report.lower} vs {report.upper} ({mode.value}): {passed}/{len(report.rows)} rows pass",
          file=sys.stderr)
    for name in report.failing():
        print(f"  fail: {name}", file=sys.stderr)
    if report.unmapped_lower:
        print("  unmapped: " + ", ".join(report.unmapped_lower), file=sys.stderr)
    return report


def cmd_refine(args) -> ExitCode:
    report = _matrix(args)
    _emit(serialize_report(report, args.format))
    return ExitCode.OK if report.passed else ExitCode.VIOLATIONS


def cmd_matrix(args) -> ExitCode:
    report = _matrix(args)
    _emit(serialize_report(report, args.format))
    return ExitCode.OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ontocheck",
                     description="Check layered ontologies, instance models and refinement maps.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    def fmt(p):
        p.add_argument("--format", choices=FORMATS, default="table")

    p = sub.add_parser("check", help="well-formedness of ontology files")
    p.add_argument("ontologies", nargs="+", metavar="ONTOLOGY")
    fmt(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("validate", help="validate an instance model, axioms included")
    p.add_argument("ontologies", nargs="+", metavar="ONTOLOGY")
    p.add_argument("instance", metavar="INSTANCE")
    p.add_argument("--partial", action="store_true",
                   help="skip minimum-multiplicity and completeness checks")
    fmt(p)
    p.set_defaults(func=cmd_validate)

    for name, func, help_ in (("refine", cmd_refine, "verify a refinement map"),
                              ("matrix", cmd_matrix, "render the verification matrix")):
        p = sub.add_parser(name, help=help_)
        p.add_argument("lower", metavar="LOWER")
        p.add_argument("upper", metavar="UPPER")
        p.add_argument("map", metavar="MAP")
        if name == "refine":
            p.add_argument("--strict", action="store_true",
                           help="also require lower minimums to cover upper minimums")
        fmt(p)
        p.set_defaults(func=func)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # usage errors and --help
        return int(exc.code or 0)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return ExitCode.USAGE_ERROR
    try:
        return int(args.func(args))
    except InputError as exc:
        print(f"ontocheck {args.command}: {exc}", file=sys.stderr)
        return ExitCode.INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
