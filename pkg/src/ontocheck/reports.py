"""Rendering validation reports and refinement matrices as json, csv or a text table."""

from __future__ import annotations

import csv
import io
import json
from typing import Union

from .conformance import Report
from .refinement import MatrixReport, RowResult

FORMATS = ("json", "csv", "table")

MATRIX_COLUMNS = ["card", "Term 1", "relationship name", "card", "Term 2"]


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def _end_label(term_name: str, qualifier) -> str:
    return f"({qualifier}) {term_name}" if qualifier else term_name


def _matrix_cells(r: RowResult) -> list[str]:
    lo, up = r.lower_rel, r.upper_rel
    return [
        str(lo.source_mult), lo.source.name, lo.name, str(lo.target_mult), lo.target.name,
        str(up.source_mult), _end_label(up.source.name, up.source_qualifier), up.name,
        str(up.target_mult), _end_label(up.target.name, up.target_qualifier),
        r.verdict,
    ]


def _row_dict(r: RowResult) -> dict:
    def side(rel):
        return {
            "source_card": str(rel.source_mult),
            "source": rel.source.name,
            "source_qualifier": rel.source_qualifier,
            "relationship": rel.name,
            "target_card": str(rel.target_mult),
            "target": rel.target.name,
            "target_qualifier": rel.target_qualifier,
        }

    return {
        "lower": side(r.lower_rel),
        "upper": side(r.upper_rel),
        "endpoint_verdicts": list(r.endpoint_verdicts),
        "multiplicity_verdicts": list(r.multiplicity_verdicts),
        "verdict": r.verdict,
        "notes": list(r.notes),
    }


def matrix_to_dict(report: MatrixReport) -> dict:
    return {
        "lower": report.lower,
        "upper": report.upper,
        "mode": report.mode.value,
        "status": report.status,
        "rows": [_row_dict(r) for r in report.rows],
        "unmapped_lower": list(report.unmapped_lower),
    }


def _table(header: list[str], rows: list[list[str]]) -> str:
    widths = [len(h) for h in header]
    for row in rows:
        widths = [max(w, len(c)) for w, c in zip(widths, row)]
    fmt = "  ".join(f"{{:<{w}}}" for w in widths)
    lines = [fmt.format(*header).rstrip()]
    lines += [fmt.format(*row).rstrip() for row in rows]
    return "\n".join(lines) + "\n"


def _csv(header: list[str], rows: list[list[str]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def serialize_report(report: Union[Report, MatrixReport], format: str = "json") -> str:
    """Render either report kind; json is the canonical, key-sorted form."""
    if format not in FORMATS:
        raise ValueError(f"unknown format {format!r}; expected one of {', '.join(FORMATS)}")
    if isinstance(report, MatrixReport):
        if format == "json":
            return _dumps(matrix_to_dict(report))
        header = MATRIX_COLUMNS + MATRIX_COLUMNS + ["verdict"]
        rows = [_matrix_cells(r) for r in report.rows]
        if format == "csv":
            return _csv(header, rows)
        return _table(header, rows)

    if format == "json":
        return _dumps(report.to_dict())
    header = ["code", "severity", "subjects", "message"]
    rows = []
    for d in report.diagnostics:
        dd = d.to_dict()
        rows.append([dd["code"], dd["severity"], " ".join(dd["subjects"]), dd["message"]])
    if format == "csv":
        return _csv(header, rows)
    return _table(header, rows)
