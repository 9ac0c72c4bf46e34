"""Configuration ingestion: JSON schema validation plus domain construction.

Validation failures carry a JSON pointer to the offending location. Defaults:
64 grid samples per axis, automatic window radius, module tolerance defaults.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field

import jsonschema
import numpy as np

from .errors import ConfigError, InvalidLatticeError
from .lattice import Lattice
from .multitile import BoxUnion, MultiTileConfig

DEFAULT_PER_AXIS = 64

_NUMBER_ROW = {"type": "array", "minItems": 1, "items": {"type": "number"}}

SCHEMA = {
    "type": "object",
    "required": ["lattice", "set", "level"],
    "additionalProperties": False,
    "properties": {
        "lattice": {
            "type": "object",
            "required": ["basis"],
            "additionalProperties": False,
            "properties": {
                "basis": {"type": "array", "minItems": 1, "items": _NUMBER_ROW},
            },
        },
        "set": {
            "type": "object",
            "required": ["boxes"],
            "additionalProperties": False,
            "properties": {
                "boxes": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "required": ["low", "high"],
                        "additionalProperties": False,
                        "properties": {"low": _NUMBER_ROW, "high": _NUMBER_ROW},
                    },
                },
            },
        },
        "level": {"type": "integer", "minimum": 1},
        "grid": {
            "type": "object",
            "required": ["per_axis"],
            "additionalProperties": False,
            "properties": {"per_axis": {"type": "integer", "minimum": 2}},
        },
        "window_radius": {"type": "number", "exclusiveMinimum": 0},
        "tolerances": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "rank": {"type": "number", "exclusiveMinimum": 0},
                "residual": {"type": "number", "exclusiveMinimum": 0},
                "det": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "frequencies": {"type": "array", "minItems": 1, "items": _NUMBER_ROW},
        "alpha": _NUMBER_ROW,
        "admissibility": {
            "type": "object",
            "required": ["v", "n"],
            "additionalProperties": False,
            "properties": {"v": _NUMBER_ROW, "n": {"type": "integer", "minimum": 1}},
        },
        "operator": {
            "type": "object",
            "required": ["kind"],
            "properties": {
                "kind": {"enum": ["shift", "multiplier", "matrix_field"]},
            },
        },
    },
}

_REQUIRED_RE = re.compile(r"'([^']+)' is a required property")


@dataclass(frozen=True)
class Tolerances:
    rank: float = 1e-9
    residual: float = 1e-8
    det: float = 1e-8


@dataclass(frozen=True, eq=False)
class RunConfig:
    raw: dict
    digest: str
    tile: MultiTileConfig
    per_axis: int
    window_radius: float | None
    tolerances: Tolerances
    frequencies: np.ndarray | None
    alpha: np.ndarray | None
    admissibility: tuple[np.ndarray, int] | None
    operator: dict | None = field(default=None)


def _pointer(path) -> str:
    return "/" + "/".join(str(p) for p in path) if path else ""


def _schema_check(doc: dict) -> None:
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(doc), key=lambda e: _pointer(e.absolute_path))
    if not errors:
        return
    err = errors[0]
    pointer = _pointer(err.absolute_path)
    if err.validator == "required":
        match = _REQUIRED_RE.search(err.message)
        if match:
            pointer = f"{pointer}/{match.group(1)}"
    raise ConfigError(pointer or "/", err.message)


def _operator_check(spec: dict, dim: int, level: int) -> dict:
    kind = spec.get("kind")
    if kind == "shift":
        h = spec.get("h")
        if not isinstance(h, list) or len(h) != dim or not all(
            isinstance(x, (int, float)) and not isinstance(x, bool) for x in h
        ):
            raise ConfigError("/operator/h", f"expected a length-{dim} number array")
        return {"kind": "shift", "h": [float(x) for x in h]}
    if kind == "multiplier":
        taps = spec.get("taps")
        if not isinstance(taps, list) or not taps:
            raise ConfigError("/operator/taps", "expected a nonempty tap array")
        parsed = []
        for i, tap in enumerate(taps):
            if not isinstance(tap, dict) or set(tap) != {"h", "re", "im"}:
                raise ConfigError(f"/operator/taps/{i}", "tap needs h, re, im")
            h = tap["h"]
            if not isinstance(h, list) or len(h) != dim:
                raise ConfigError(f"/operator/taps/{i}/h",
                                  f"expected a length-{dim} number array")
            parsed.append({"h": [float(x) for x in h],
                           "re": float(tap["re"]), "im": float(tap["im"])})
        return {"kind": "multiplier", "taps": parsed}
    if kind == "matrix_field":
        expr = spec.get("expr")
        if not isinstance(expr, dict) or "name" not in expr:
            raise ConfigError("/operator/expr", "expected an object with a name")
        name = expr["name"]
        if name == "constant":
            entries = expr.get("entries")
            if (not isinstance(entries, list) or len(entries) != level
                    or any(not isinstance(r, list) or len(r) != level for r in entries)):
                raise ConfigError("/operator/expr/entries",
                                  f"expected a {level}x{level} matrix of re/im pairs")
            return {"kind": "matrix_field", "expr": expr}
        if name == "diag_exponentials":
            hs = expr.get("h")
            if (not isinstance(hs, list) or len(hs) != level
                    or any(not isinstance(h, list) or len(h) != dim for h in hs)):
                raise ConfigError("/operator/expr/h",
                                  f"expected {level} dual points of dimension {dim}")
            return {"kind": "matrix_field", "expr": expr}
        if name == "nilpotent":
            h = expr.get("h")
            if not isinstance(h, list) or len(h) != dim:
                raise ConfigError("/operator/expr/h",
                                  f"expected a length-{dim} number array")
            return {"kind": "matrix_field", "expr": expr}
        raise ConfigError("/operator/expr/name",
                          "expected constant, diag_exponentials or nilpotent")
    raise ConfigError("/operator/kind", "expected shift, multiplier or matrix_field")


def parse_config(text: str) -> RunConfig:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("/", f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("/", "config must be a JSON object")
    _schema_check(doc)

    digest = hashlib.sha256(
        json.dumps(doc, sort_keys=True, separators=(",", ":")).encode()
    ).hexdigest()

    try:
        lattice = Lattice(np.asarray(doc["lattice"]["basis"], dtype=float))
    except InvalidLatticeError as exc:
        raise ConfigError("/lattice/basis", str(exc)) from exc
    try:
        region = BoxUnion.from_json(doc["set"])
    except ValueError as exc:
        raise ConfigError("/set/boxes", str(exc)) from exc
    try:
        tile = MultiTileConfig(region, lattice, doc["level"])
    except ValueError as exc:
        raise ConfigError("/level", str(exc)) from exc

    per_axis = doc.get("grid", {}).get("per_axis", DEFAULT_PER_AXIS)
    window_radius = doc.get("window_radius")
    tolerances = Tolerances(**doc.get("tolerances", {}))

    frequencies = None
    if "frequencies" in doc:
        rows = doc["frequencies"]
        if any(len(r) != lattice.dim for r in rows):
            raise ConfigError("/frequencies",
                              f"each frequency must have dimension {lattice.dim}")
        frequencies = np.asarray(rows, dtype=float)

    alpha = None
    if "alpha" in doc:
        if len(doc["alpha"]) != lattice.dim:
            raise ConfigError("/alpha", f"alpha must have dimension {lattice.dim}")
        alpha = np.asarray(doc["alpha"], dtype=float)

    admissibility = None
    if "admissibility" in doc:
        v = doc["admissibility"]["v"]
        if len(v) != lattice.dim:
            raise ConfigError("/admissibility/v",
                              f"v must have dimension {lattice.dim}")
        admissibility = (np.asarray(v, dtype=float), int(doc["admissibility"]["n"]))

    operator = None
    if "operator" in doc:
        operator = _operator_check(doc["operator"], lattice.dim, tile.level)

    return RunConfig(
        raw=doc,
        digest=digest,
        tile=tile,
        per_axis=per_axis,
        window_radius=window_radius,
        tolerances=tolerances,
        frequencies=frequencies,
        alpha=alpha,
        admissibility=admissibility,
        operator=operator,
    )
