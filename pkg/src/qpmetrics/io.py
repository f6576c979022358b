"""Versioned instance files: a strict, diffable JSON schema.

One document holds one object — a measure, channel, weighted channel,
channel sequence, or input measure — plus optional seed provenance.
Complex entries are ``[re, im]`` pairs, rational cell endpoints are
``[num, den]`` pairs, and floats are printed with 17 significant
digits, so ``parse -> serialize`` reproduces canonical text byte for
byte and ``serialize -> parse`` reproduces the object bit for bit.
Unknown fields are rejected by name; non-finite numbers are rejected.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .channels import Channel, ChannelSequence, InputSpace
from .dilation import SpectralMeasure
from .errors import InvalidArgumentError, ParseError, SchemaVersionError
from .modmu import InputMeasure, ModMuChannel
from .qpm import QPM, CellGeometry, OutcomeSpace

SCHEMA = "qpm-instance/1"


@dataclass(frozen=True, eq=False)
class InstanceFile:
    """Parsed document: payload object plus optional provenance."""

    kind: str
    payload: object
    provenance: dict | None = None


# ---------------------------------------------------------------------------
# Deterministic emitter
# ---------------------------------------------------------------------------

def _emit_scalar(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if value is None:
        return "null"
    if isinstance(value, int):
        return repr(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise InvalidArgumentError(f"cannot serialize non-finite number {value!r}")
        if value == 0.0:
            value = 0.0  # normalize -0.0 so canonical text is parse-stable
        return format(value, ".17g")
    if isinstance(value, str):
        return json.dumps(value)
    raise InvalidArgumentError(f"cannot serialize value of type {type(value).__name__}")


def _emit(value, indent: int) -> str:
    if isinstance(value, dict):
        if not value:
            return "{}"
        pad, inner = "  " * indent, "  " * (indent + 1)
        items = [
            f"{inner}{json.dumps(str(k))}: {_emit(v, indent + 1)}"
            for k, v in value.items()
        ]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_emit(v, indent) for v in value) + "]"
    return _emit_scalar(value)


# ---------------------------------------------------------------------------
# Document builders
# ---------------------------------------------------------------------------

def _complex_doc(z: complex) -> list:
    return [float(z.real), float(z.imag)]


def _matrix_doc(M: np.ndarray) -> list:
    return [[_complex_doc(z) for z in row] for row in np.asarray(M)]


def _stack_doc(stack: np.ndarray) -> list:
    return [_matrix_doc(M) for M in stack]


def _space_doc(space: OutcomeSpace) -> dict:
    doc = {"atoms": list(space.atoms)}
    if space.geometry is not None:
        doc["geometry"] = {
            "kind": space.geometry.kind,
            "cells": [
                [[a.numerator, a.denominator], [b.numerator, b.denominator]]
                for a, b in space.geometry.cells
            ],
        }
    return doc


def _inputs_doc(inputs: InputSpace) -> dict:
    return {"points": list(inputs.points)}


def _payload_doc(payload) -> tuple[str, dict]:
    if isinstance(payload, SpectralMeasure):
        payload = payload.underlying
    if isinstance(payload, QPM):
        return "qpm", {
            "dim": payload.dim,
            "space": _space_doc(payload.space),
            "effects": _stack_doc(payload.effects),
        }
    if isinstance(payload, Channel):
        return "channel", {
            "dim": payload.dim,
            "inputs": _inputs_doc(payload.inputs),
            "space": _space_doc(payload.space),
            "family": [_stack_doc(fx) for fx in payload.family],
        }
    if isinstance(payload, ModMuChannel):
        return "channel+measure", {
            "dim": payload.dim,
            "inputs": _inputs_doc(payload.inputs),
            "space": _space_doc(payload.space),
            "family": [_stack_doc(fx) for fx in payload.rep.family],
            "mu": [float(w) for w in payload.mu.weights],
            "canonical": bool(payload.canonical),
        }
    if isinstance(payload, ChannelSequence):
        head = payload.terms[0]
        return "sequence", {
            "dim": head.dim,
            "inputs": _inputs_doc(head.inputs),
            "space": _space_doc(head.space),
            "terms": [[_stack_doc(fx) for fx in t.family] for t in payload.terms],
        }
    if isinstance(payload, InputMeasure):
        return "measure", {
            "inputs": _inputs_doc(payload.inputs),
            "mu": [float(w) for w in payload.weights],
        }
    raise InvalidArgumentError(
        f"cannot serialize object of type {type(payload).__name__}"
    )


def serialize_instance(obj, provenance: dict | None = None) -> str:
    """Canonical text for an instance (object or :class:`InstanceFile`)."""
    if isinstance(obj, InstanceFile):
        if provenance is None:
            provenance = obj.provenance
        obj = obj.payload
    kind, body = _payload_doc(obj)
    doc = {"schema": SCHEMA, "kind": kind}
    doc.update(body)
    if provenance is not None:
        doc["provenance"] = provenance
    return _emit(doc, 0) + "\n"


# ---------------------------------------------------------------------------
# Strict parser
# ---------------------------------------------------------------------------

def _reject_constant(name: str):
    raise ParseError(f"non-finite number {name!r} is not allowed")


def _check_fields(obj: dict, required: tuple[str, ...], optional: tuple[str, ...], where: str) -> None:
    for key in obj:
        if key not in required and key not in optional:
            raise ParseError(f"unknown field {key!r} in {where}")
    for key in required:
        if key not in obj:
            raise ParseError(f"missing field {key!r} in {where}")


def _as_dict(value, where: str) -> dict:
    if not isinstance(value, dict):
        raise ParseError(f"{where} must be an object")
    return value


def _as_list(value, where: str) -> list:
    if not isinstance(value, list):
        raise ParseError(f"{where} must be an array")
    return value


def _as_int(value, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ParseError(f"{where} must be an integer")
    return value


def _as_float(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParseError(f"{where} must be a number")
    out = float(value)
    if not math.isfinite(out):
        raise ParseError(f"{where} must be finite")
    return out


def _as_str(value, where: str) -> str:
    if not isinstance(value, str):
        raise ParseError(f"{where} must be a string")
    return value


def _as_complex(value, where: str) -> complex:
    pair = _as_list(value, where)
    if len(pair) != 2:
        raise ParseError(f"{where} must be a [re, im] pair")
    return complex(_as_float(pair[0], where), _as_float(pair[1], where))


def _as_fraction(value, where: str) -> Fraction:
    pair = _as_list(value, where)
    if len(pair) != 2:
        raise ParseError(f"{where} must be a [numerator, denominator] pair")
    num, den = _as_int(pair[0], where), _as_int(pair[1], where)
    if den <= 0:
        raise ParseError(f"{where} must have a positive denominator")
    return Fraction(num, den)


def _parse_matrix(value, d: int, where: str) -> np.ndarray:
    rows = _as_list(value, where)
    if len(rows) != d:
        raise ParseError(f"{where} must have {d} rows")
    out = np.empty((d, d), dtype=np.complex128)
    for i, row in enumerate(rows):
        row = _as_list(row, f"{where} row {i}")
        if len(row) != d:
            raise ParseError(f"{where} row {i} must have {d} entries")
        for j, entry in enumerate(row):
            out[i, j] = _as_complex(entry, f"{where}[{i}][{j}]")
    return out


def _parse_stack(value, m: int, d: int, where: str) -> np.ndarray:
    mats = _as_list(value, where)
    if len(mats) != m:
        raise ParseError(f"{where} must have {m} entries")
    return np.stack([_parse_matrix(M, d, f"{where}[{a}]") for a, M in enumerate(mats)])


def _parse_space(value) -> OutcomeSpace:
    doc = _as_dict(value, "'space'")
    _check_fields(doc, ("atoms",), ("geometry",), "'space'")
    atoms = tuple(
        _as_str(a, f"'space.atoms[{i}]'") for i, a in enumerate(_as_list(doc["atoms"], "'space.atoms'"))
    )
    geometry = None
    if "geometry" in doc:
        g = _as_dict(doc["geometry"], "'space.geometry'")
        _check_fields(g, ("kind", "cells"), (), "'space.geometry'")
        cells = []
        for i, cell in enumerate(_as_list(g["cells"], "'space.geometry.cells'")):
            pair = _as_list(cell, f"'space.geometry.cells[{i}]'")
            if len(pair) != 2:
                raise ParseError(f"'space.geometry.cells[{i}]' must be an [start, end] pair")
            cells.append(
                (
                    _as_fraction(pair[0], f"'space.geometry.cells[{i}]' start"),
                    _as_fraction(pair[1], f"'space.geometry.cells[{i}]' end"),
                )
            )
        geometry = CellGeometry(_as_str(g["kind"], "'space.geometry.kind'"), tuple(cells))
    return OutcomeSpace(atoms, geometry)


def _parse_inputs(value) -> InputSpace:
    doc = _as_dict(value, "'inputs'")
    _check_fields(doc, ("points",), (), "'inputs'")
    points = tuple(
        _as_str(p, f"'inputs.points[{i}]'")
        for i, p in enumerate(_as_list(doc["points"], "'inputs.points'"))
    )
    return InputSpace(points)


def _parse_family(value, n: int, m: int, d: int, where: str) -> np.ndarray:
    fams = _as_list(value, where)
    if len(fams) != n:
        raise ParseError(f"{where} must have {n} entries")
    return np.stack(
        [_parse_stack(fx, m, d, f"{where}[{x}]") for x, fx in enumerate(fams)]
    )


def _parse_provenance(value) -> dict:
    doc = _as_dict(value, "'provenance'")
    _check_fields(doc, (), ("generator", "seed", "params"), "'provenance'")
    if "generator" in doc:
        _as_str(doc["generator"], "'provenance.generator'")
    if "seed" in doc:
        _as_int(doc["seed"], "'provenance.seed'")
    if "params" in doc:
        _as_dict(doc["params"], "'provenance.params'")
    return doc


def _check_finite(node, where: str) -> None:
    if isinstance(node, float) and not math.isfinite(node):
        raise ParseError(f"non-finite number in {where}")
    elif isinstance(node, dict):
        for k, v in node.items():
            _check_finite(v, f"{where}.{k}")
    elif isinstance(node, list):
        for i, v in enumerate(node):
            _check_finite(v, f"{where}[{i}]")


def parse_instance(text: str) -> InstanceFile:
    """Parse canonical or hand-written instance text (strict)."""
    try:
        doc = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno, column=exc.colno) from exc
    if not isinstance(doc, dict):
        raise ParseError("top level must be an object")
    _check_finite(doc, "document")
    schema = doc.get("schema")
    if schema != SCHEMA:
        raise SchemaVersionError(
            f"unsupported schema {schema!r}; expected {SCHEMA!r}"
        )
    kind = doc.get("kind")
    if kind not in ("qpm", "channel", "channel+measure", "sequence", "measure"):
        raise ParseError(f"unknown kind {kind!r}")

    base = ("schema", "kind")
    if kind == "qpm":
        _check_fields(doc, base + ("dim", "space", "effects"), ("provenance",), "document")
        dim = _as_int(doc["dim"], "'dim'")
        space = _parse_space(doc["space"])
        effects = _parse_stack(doc["effects"], len(space), dim, "'effects'")
        payload = QPM(space, dim, effects)
    elif kind == "channel":
        _check_fields(doc, base + ("dim", "inputs", "space", "family"), ("provenance",), "document")
        dim = _as_int(doc["dim"], "'dim'")
        inputs = _parse_inputs(doc["inputs"])
        space = _parse_space(doc["space"])
        family = _parse_family(doc["family"], len(inputs), len(space), dim, "'family'")
        payload = Channel(inputs, space, dim, family)
    elif kind == "channel+measure":
        _check_fields(
            doc,
            base + ("dim", "inputs", "space", "family", "mu", "canonical"),
            ("provenance",),
            "document",
        )
        dim = _as_int(doc["dim"], "'dim'")
        inputs = _parse_inputs(doc["inputs"])
        space = _parse_space(doc["space"])
        family = _parse_family(doc["family"], len(inputs), len(space), dim, "'family'")
        mu_list = _as_list(doc["mu"], "'mu'")
        weights = tuple(_as_float(w, f"'mu[{i}]'") for i, w in enumerate(mu_list))
        canonical = doc["canonical"]
        if not isinstance(canonical, bool):
            raise ParseError("'canonical' must be a boolean")
        payload = ModMuChannel(
            Channel(inputs, space, dim, family),
            InputMeasure(inputs, weights),
            canonical=canonical,
        )
    elif kind == "sequence":
        _check_fields(doc, base + ("dim", "inputs", "space", "terms"), ("provenance",), "document")
        dim = _as_int(doc["dim"], "'dim'")
        inputs = _parse_inputs(doc["inputs"])
        space = _parse_space(doc["space"])
        terms = _as_list(doc["terms"], "'terms'")
        if not terms:
            raise ParseError("'terms' must be nonempty")
        channels = tuple(
            Channel(
                inputs,
                space,
                dim,
                _parse_family(t, len(inputs), len(space), dim, f"'terms[{i}]'"),
            )
            for i, t in enumerate(terms)
        )
        payload = ChannelSequence(channels)
    else:  # measure
        _check_fields(doc, base + ("inputs", "mu"), ("provenance",), "document")
        inputs = _parse_inputs(doc["inputs"])
        mu_list = _as_list(doc["mu"], "'mu'")
        weights = tuple(_as_float(w, f"'mu[{i}]'") for i, w in enumerate(mu_list))
        payload = InputMeasure(inputs, weights)

    provenance = _parse_provenance(doc["provenance"]) if "provenance" in doc else None
    return InstanceFile(kind, payload, provenance)


def write_instance(path, obj, provenance: dict | None = None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize_instance(obj, provenance))


def read_instance(path) -> InstanceFile:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_instance(fh.read())
