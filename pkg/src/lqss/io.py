"""JSON system files.

A system file holds ``n``, ``m``, ``n_y`` and exactly one of ``physical``
(``R``, ``K``, ``S``, ``output_fields``; complex entries as ``[re, im]``
pairs) or ``quadrature`` (``A``, ``B``, ``C``, ``D``).  Matrices are
row-major nested lists.  Unknown keys are rejected.
"""

from __future__ import annotations

import json
from pathlib import Path

import jsonschema
import numpy as np

from .model import PhysicalParams, QuadratureModel, build_quadrature

_real_matrix = {"type": "array", "items": {"type": "array", "items": {"type": "number"}}}
_complex_matrix = {
    "type": "array",
    "items": {
        "type": "array",
        "items": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
    },
}

SYSTEM_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "properties": {
        "n": {"type": "integer", "minimum": 1},
        "m": {"type": "integer", "minimum": 1},
        "n_y": {"type": "integer", "minimum": 0},
        "physical": {
            "type": "object",
            "properties": {
                "R": _real_matrix,
                "K": _complex_matrix,
                "S": _complex_matrix,
                "output_fields": {"type": "array", "items": {"type": "integer", "minimum": 1}},
            },
            "required": ["R", "K", "S", "output_fields"],
            "additionalProperties": False,
        },
        "quadrature": {
            "type": "object",
            "properties": {"A": _real_matrix, "B": _real_matrix, "C": _real_matrix, "D": _real_matrix},
            "required": ["A", "B", "C", "D"],
            "additionalProperties": False,
        },
    },
    "required": ["n", "m", "n_y"],
    "oneOf": [{"required": ["physical"]}, {"required": ["quadrature"]}],
    "additionalProperties": False,
}


class SystemFileError(ValueError):
    """A system file failed to parse or validate."""


def _as_complex(nested) -> np.ndarray:
    arr = np.asarray(nested, dtype=float)
    return arr[..., 0] + 1j * arr[..., 1]


def _to_pairs(Z) -> list:
    Z = np.asarray(Z, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in Z]


def _matrix(nested, name) -> np.ndarray:
    try:
        arr = np.asarray(nested, dtype=float)
    except ValueError as exc:
        raise SystemFileError(f"{name}: rows have unequal lengths") from exc
    return arr


def validate_document(doc: dict) -> None:
    """Schema validation plus dimension checks against ``n``, ``m``, ``n_y``."""
    validator = jsonschema.Draft202012Validator(SYSTEM_SCHEMA)
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        msgs = []
        for e in errors:
            path = "/".join(str(p) for p in e.absolute_path) or "<root>"
            msgs.append(f"{path}: {e.message}")
        raise SystemFileError("; ".join(msgs))
    n, m, n_y = doc["n"], doc["m"], doc["n_y"]
    if n_y % 2 or n_y > 2 * m:
        raise SystemFileError(f"n_y: must be even and at most 2m, got {n_y}")
    if "quadrature" in doc:
        q = doc["quadrature"]
        expect = {"A": (2 * n, 2 * n), "B": (2 * n, 2 * m), "C": (n_y, 2 * n), "D": (n_y, 2 * m)}
        for key, shape in expect.items():
            got = _matrix(q[key], f"quadrature/{key}").shape
            if got != shape and not (shape[0] == 0 and got in ((0,), (0, 0))):
                raise SystemFileError(f"quadrature/{key}: expected shape {shape}, got {got}")
    else:
        ph = doc["physical"]
        if _matrix(ph["R"], "physical/R").shape != (2 * n, 2 * n):
            raise SystemFileError(f"physical/R: expected shape {(2 * n, 2 * n)}")
        for key, shape in (("K", (m, 2 * n)), ("S", (m, m))):
            got = np.asarray(ph[key], dtype=float).shape
            if got != shape + (2,):
                raise SystemFileError(f"physical/{key}: expected {shape} of [re, im] pairs, got {got}")
        if len(ph["output_fields"]) * 2 != n_y:
            raise SystemFileError("physical/output_fields: length must equal n_y / 2")


def system_from_document(doc: dict):
    """Build a :class:`PhysicalParams` or :class:`QuadratureModel` from a parsed document."""
    validate_document(doc)
    try:
        if "physical" in doc:
            ph = doc["physical"]
            return PhysicalParams(
                np.asarray(ph["R"], dtype=float),
                _as_complex(ph["K"]),
                _as_complex(ph["S"]),
                tuple(ph["output_fields"]),
            )
        q = doc["quadrature"]
        n_y, m = doc["n_y"], doc["m"]
        C = np.asarray(q["C"], dtype=float).reshape(n_y, 2 * doc["n"])
        D = np.asarray(q["D"], dtype=float).reshape(n_y, 2 * m)
        return QuadratureModel(np.asarray(q["A"]), np.asarray(q["B"]), C, D)
    except ValueError as exc:
        raise SystemFileError(str(exc)) from exc


def load_system(path):
    """Read and validate a system file."""
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SystemFileError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    return system_from_document(doc)


def as_quadrature(system) -> QuadratureModel:
    return build_quadrature(system) if isinstance(system, PhysicalParams) else system


def system_to_document(system) -> dict:
    if isinstance(system, PhysicalParams):
        return {
            "n": system.n,
            "m": system.m,
            "n_y": 2 * len(system.output_fields),
            "physical": {
                "R": system.R.tolist(),
                "K": _to_pairs(system.K),
                "S": _to_pairs(system.S),
                "output_fields": list(system.output_fields),
            },
        }
    return {
        "n": system.n,
        "m": system.m,
        "n_y": system.n_y,
        "quadrature": {k: getattr(system, k).tolist() for k in "ABCD"},
    }


def dump_system(system, path) -> None:
    doc = system_to_document(system)
    validate_document(doc)
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")
