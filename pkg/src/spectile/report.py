"""Deterministic report objects and their JSON/CSV emission.

Emitted bytes are a pure function of the input config: keys are sorted,
floats use Python's shortest round-trip repr (17 significant digits max,
lowercase exponents), and volatile fields like wall time never enter the
serialized form.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class Table:
    """A fixed-header table; cells are str, int, float, or None."""

    header: tuple[str, ...]
    rows: tuple[tuple, ...]


@dataclass
class Report:
    subcommand: str
    input_digest: str
    passed: bool
    result: dict
    table: Table | None = None
    wall_time_s: float = 0.0


def plain(value):
    """Recursively convert numpy/complex values into JSON-safe primitives."""
    if isinstance(value, dict):
        return {str(k): plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return [plain(v) for v in value.tolist()]
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer, int)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        return float(value)
    if isinstance(value, (np.complexfloating, complex)):
        return {"re": float(value.real), "im": float(value.imag)}
    if value is None or isinstance(value, str):
        return value
    raise TypeError(f"cannot serialize {type(value).__name__}")


def render_json(report: Report) -> str:
    doc = {
        "subcommand": report.subcommand,
        "input_digest": report.input_digest,
        "passed": report.passed,
        "result": plain(report.result),
    }
    return json.dumps(doc, sort_keys=True, indent=2, allow_nan=False) + "\n"


def _csv_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (np.bool_, bool)):
        return "true" if value else "false"
    if isinstance(value, (np.integer, int)):
        return str(int(value))
    if isinstance(value, (np.floating, float)):
        return repr(float(value))
    return str(value)


def render_csv(report: Report) -> str:
    if report.table is None:
        return ""
    lines = [",".join(report.table.header)]
    for row in report.table.rows:
        lines.append(",".join(_csv_cell(v) for v in row))
    return "\n".join(lines) + "\n"


def emit(report: Report, fmt: str, path: str | None) -> None:
    """Write the report to ``path`` (or stdout when None) in json or csv."""
    if fmt == "json":
        text = render_json(report)
    elif fmt == "csv":
        text = render_csv(report)
    else:
        raise ValueError(f"unknown format {fmt!r}")
    if path is None:
        import sys

        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
