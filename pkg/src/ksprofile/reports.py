"""JSON report schemas and deterministic serialization."""
from __future__ import annotations

import json
import math

import jsonschema

_num = {"type": "number"}
_pos = {"type": "number", "exclusiveMinimum": 0}
_outcome = {
    "type": "object",
    "required": ["kind", "radius"],
    "properties": {"kind": {"enum": ["global", "blow_up", "touch_zero"]}, "radius": _num},
}

SCHEMAS = {
    "solve": {
        "type": "object",
        "required": ["lambda", "params", "outcome", "r_end", "n_steps"],
        "properties": {"lambda": _num, "params": {"type": "object"}, "outcome": _outcome,
                       "r_end": _num, "n_steps": {"type": "integer"}},
    },
    "critical": {
        "type": "object",
        "required": ["lambda_star", "bracket", "iterations", "endpoint_outcomes", "controls"],
        "properties": {
            "lambda_star": _pos,
            "bracket": {"type": "array", "items": _pos, "minItems": 2, "maxItems": 2},
            "iterations": {"type": "integer", "minimum": 0},
            "endpoint_outcomes": {"type": "object", "required": ["lo", "hi"],
                                  "properties": {"lo": _outcome, "hi": _outcome}},
            "controls": {"type": "object"},
        },
    },
    "classify": {
        "type": "object",
        "required": ["N", "alpha", "kappa", "class"],
        "properties": {"N": {"type": "integer"}, "alpha": _num,
                       "kappa": {"type": ["number", "null"]},
                       "class": {"enum": ["regular", "less_singular", "very_singular",
                                          "any_depends_on_kappa"]}},
    },
    "eigen": {
        "type": "object",
        "required": ["N", "delta", "ladder", "limit"],
        "properties": {"N": {"type": "integer"}, "delta": _pos, "limit": _pos,
                       "ladder": {"type": "array", "items": {
                           "type": "object", "required": ["R", "lambda"],
                           "properties": {"R": _pos, "lambda": _num}}}},
    },
    "variational": {
        "type": "object",
        "required": ["J", "H", "M_star", "el_residual", "R_cut", "nodes"],
        "properties": {"J": _num, "H": _num, "M_star": _num, "el_residual": _num,
                       "R_cut": _pos, "nodes": {"type": "integer"}},
    },
    "asymptotics": {
        "type": "object",
        "required": ["M_star", "window", "plateau_defect", "converged"],
        "properties": {"M_star": _num, "plateau_defect": _num, "converged": {"type": "boolean"},
                       "window": {"type": "array", "items": _num}},
    },
    "mass": {
        "type": "object",
        "required": ["M", "Mp", "M1", "t_invariance_defect"],
        "properties": {"M": _num, "Mp": {"type": "object", "additionalProperties": _num},
                       "M1": {"type": ["number", "null"]}, "t_invariance_defect": _num,
                       "tail_mass_fraction": _num},
    },
    "residual": {
        "type": "object",
        "required": ["max_relative", "u_equation", "v_equation", "t", "h"],
        "properties": {"max_relative": _num, "u_equation": _num, "v_equation": _num,
                       "t": _pos, "h": _pos},
    },
}


def _clean(obj):
    """Replace non-finite floats by strings JSON can carry."""
    if isinstance(obj, float):
        if math.isnan(obj):
            return None
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
        return obj
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def validate(kind: str, payload: dict) -> dict:
    jsonschema.validate(payload, SCHEMAS[kind])
    return payload


def dumps(kind: str, payload: dict) -> str:
    """Validate and serialize with sorted keys; identical input gives identical bytes."""
    data = _clean(payload)
    validate(kind, data)
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def loads(kind: str, text: str) -> dict:
    """Parse and re-validate a report produced by :func:`dumps`."""
    return validate(kind, json.loads(text))
