"""JSON encodings for parameter records, instances, certificates and reports.

Every top-level document carries ``"schema_version": 1``.  Rationals are
written as ``{"num": p, "den": q}`` so exact parameters round-trip.  The
``*_SCHEMA`` dicts are JSON Schema (draft 2020-12) documents.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from .ambient import AmbientPoint, InvalidPoint
from .lagrangian import LagrangianPoint, SecondFundamentalForm
from .quadform import (
    FormParams,
    KernelDescription,
    PSDCertificate,
    SimpleFormParams,
    StructuredFormParams,
    InvalidParams,
)

SCHEMA_VERSION = 1


class SchemaError(ValueError):
    pass


# --------------------------------------------------------------------------
# numbers

def encode_number(v):
    if isinstance(v, Fraction):
        return {"num": v.numerator, "den": v.denominator}
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    v = float(v)
    if math.isinf(v):
        return "+inf" if v > 0 else "-inf"
    if math.isnan(v):
        return "nan"
    return v


def decode_number(v, field: str):
    if isinstance(v, bool):
        raise SchemaError(f"{field}: expected a number, got a boolean")
    if isinstance(v, int):
        return v
    if isinstance(v, float):
        return v
    if isinstance(v, dict):
        if set(v) != {"num", "den"}:
            raise SchemaError(f"{field}: rational must have exactly the keys 'num' and 'den'")
        num, den = v["num"], v["den"]
        if not all(isinstance(x, int) and not isinstance(x, bool) for x in (num, den)):
            raise SchemaError(f"{field}: 'num' and 'den' must be integers")
        if den == 0:
            raise SchemaError(f"{field}: zero denominator")
        return Fraction(num, den)
    raise SchemaError(f"{field}: expected a number or {{'num','den'}} object, got {type(v).__name__}")


# --------------------------------------------------------------------------
# parameter records

_RATIONAL = {
    "oneOf": [
        {"type": "number"},
        {
            "type": "object",
            "properties": {"num": {"type": "integer"}, "den": {"type": "integer", "not": {"const": 0}}},
            "required": ["num", "den"],
            "additionalProperties": False,
        },
    ]
}

PARAMS_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "Structured quadratic form parameters",
    "oneOf": [
        {
            "type": "object",
            "properties": {
                "schema_version": {"const": 1},
                "form": {"const": "structured"},
                "mu": _RATIONAL, "alpha1": _RATIONAL, "alpha2": _RATIONAL,
                "beta": _RATIONAL, "a": _RATIONAL,
                "k1": {"type": "integer", "minimum": 0},
                "k2": {"type": "integer", "minimum": 0},
            },
            "required": ["form", "mu", "alpha1", "alpha2", "beta", "a", "k1", "k2"],
            "additionalProperties": False,
        },
        {
            "type": "object",
            "properties": {
                "schema_version": {"const": 1},
                "form": {"const": "simple"},
                "mu": _RATIONAL, "alpha": _RATIONAL, "beta": _RATIONAL, "a": _RATIONAL,
                "n": {"type": "integer", "minimum": 2},
            },
            "required": ["form", "mu", "alpha", "beta", "a", "n"],
            "additionalProperties": False,
        },
    ],
}

_STRUCTURED_FIELDS = ("mu", "alpha1", "alpha2", "beta", "a")
_SIMPLE_FIELDS = ("mu", "alpha", "beta", "a")


def params_to_dict(params: FormParams) -> dict:
    if isinstance(params, SimpleFormParams):
        out = {"schema_version": SCHEMA_VERSION, "form": "simple"}
        out.update({k: encode_number(getattr(params, k)) for k in _SIMPLE_FIELDS})
        out["n"] = params.n
        return out
    out = {"schema_version": SCHEMA_VERSION, "form": "structured"}
    out.update({k: encode_number(getattr(params, k)) for k in _STRUCTURED_FIELDS})
    out["k1"], out["k2"] = int(params.k1), int(params.k2)
    return out


def _int_field(doc: dict, key: str) -> int:
    if key not in doc:
        raise SchemaError(f"{key}: missing required field")
    v = doc[key]
    if isinstance(v, bool) or not isinstance(v, int):
        raise SchemaError(f"{key}: expected an integer, got {v!r}")
    return v


def params_from_dict(doc) -> FormParams:
    if not isinstance(doc, dict):
        raise SchemaError("params: expected a JSON object")
    _check_version(doc)
    form = doc.get("form")
    if form == "structured":
        fields, ints = _STRUCTURED_FIELDS, ("k1", "k2")
    elif form == "simple":
        fields, ints = _SIMPLE_FIELDS, ("n",)
    else:
        raise SchemaError(f"form: expected 'structured' or 'simple', got {form!r}")
    allowed = set(fields) | set(ints) | {"form", "schema_version"}
    extra = sorted(set(doc) - allowed)
    if extra:
        raise SchemaError(f"{extra[0]}: unknown field for a {form} form")
    values = []
    for k in fields:
        if k not in doc:
            raise SchemaError(f"{k}: missing required field")
        values.append(decode_number(doc[k], k))
    values += [_int_field(doc, k) for k in ints]
    try:
        if form == "structured":
            return StructuredFormParams(*values)
        return SimpleFormParams(*values)
    except InvalidParams as exc:
        raise SchemaError(f"params: {exc}") from exc


def _check_version(doc: dict) -> None:
    v = doc.get("schema_version", SCHEMA_VERSION)
    if v != SCHEMA_VERSION:
        raise SchemaError(f"schema_version: unsupported version {v!r} (expected {SCHEMA_VERSION})")


# --------------------------------------------------------------------------
# certificates

CERTIFICATE_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "PSD certificate",
    "type": "object",
    "properties": {
        "schema_version": {"const": 1},
        "certified": {"type": "boolean"},
        "status": {"enum": ["certified_psd_with_kernel", "undetermined"]},
        "tolerance": {"type": "number", "minimum": 0},
        "params": PARAMS_SCHEMA,
        "conditions": {
            "type": "object",
            "additionalProperties": {
                "type": "object",
                "properties": {"pass": {"type": "boolean"}, "value": _RATIONAL},
                "required": ["pass", "value"],
            },
        },
        "spectrum": {
            "type": "object",
            "properties": {
                "linear_factors": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "properties": {"value": _RATIONAL, "multiplicity": {"type": "integer", "minimum": 0}},
                        "required": ["value", "multiplicity"],
                    },
                },
                "tail_coeffs": {"type": "array", "items": _RATIONAL, "minItems": 2, "maxItems": 3},
                "eigenvalues": {"type": "array", "items": {"type": "number"}},
            },
            "required": ["linear_factors", "tail_coeffs", "eigenvalues"],
        },
        "kernel": {
            "oneOf": [
                {"type": "null"},
                {
                    "type": "object",
                    "properties": {
                        "case": {"enum": ["B1", "B2", "B3", "B4", "B5", "B1'", "B2'", "B3'"]},
                        "dim": {"type": "integer", "minimum": 0},
                        "basis": {"type": "array", "items": {"type": "array", "items": _RATIONAL}},
                    },
                    "required": ["case", "dim", "basis"],
                },
            ]
        },
        "oracle_spectrum": {"oneOf": [{"type": "null"}, {"type": "array", "items": {"type": "number"}}]},
    },
    "required": ["schema_version", "certified", "status", "conditions", "spectrum", "kernel"],
}


def kernel_to_dict(kernel: KernelDescription | None):
    if kernel is None:
        return None
    return {
        "case": kernel.case_label,
        "dim": kernel.kernel_dim,
        "basis": [[encode_number(v) for v in vec] for vec in kernel.kernel_basis],
    }


def certificate_to_dict(params: FormParams, cert: PSDCertificate, kernel=None, oracle=None) -> dict:
    spec = cert.spectrum
    return {
        "schema_version": SCHEMA_VERSION,
        "certified": cert.certified,
        "status": cert.status,
        "tolerance": cert.verdict.tolerance,
        "params": params_to_dict(params),
        "conditions": {
            label: {"pass": ok, "value": encode_number(cert.verdict.values[label])}
            for label, ok in cert.verdict.per_condition.items()
        },
        "spectrum": {
            "linear_factors": [
                {"value": encode_number(v), "multiplicity": int(m)} for v, m in spec.linear_factors
            ],
            "tail_coeffs": [encode_number(v) for v in spec.tail_coeffs],
            "eigenvalues": [float(v) for v in spec.eigenvalues()],
        },
        "kernel": kernel_to_dict(kernel),
        "oracle_spectrum": None if oracle is None else [float(v) for v in oracle],
    }


# --------------------------------------------------------------------------
# Lagrangian instances

INSTANCE_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "Pointwise Lagrangian submanifold instance",
    "type": "object",
    "properties": {
        "schema_version": {"const": 1},
        "n": {"type": "integer", "minimum": 2},
        "h": {"type": "array", "items": {"type": "array", "items": {"type": "array", "items": {"type": "number"}}}},
        "abc": {
            "type": "object",
            "properties": {"a": {"type": "number"}, "b": {"type": "number"}, "c": {"type": "number"}},
            "required": ["a", "b", "c"],
            "additionalProperties": False,
        },
        "xi": {"type": "array", "items": {"type": "number"}},
    },
    "required": ["n", "h", "abc", "xi"],
}


def instance_to_dict(p: LagrangianPoint) -> dict:
    a, b, c = p.abc
    return {
        "schema_version": SCHEMA_VERSION,
        "n": p.n,
        "h": p.h.coeffs.tolist(),
        "abc": {"a": a, "b": b, "c": c},
        "xi": [float(v) for v in p.ambient.xi],
    }


def _real(v, field: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise SchemaError(f"{field}: expected a number, got {v!r}")
    return float(v)


def instance_from_dict(doc) -> LagrangianPoint:
    if not isinstance(doc, dict):
        raise SchemaError("instance: expected a JSON object")
    _check_version(doc)
    for key in ("n", "h", "abc", "xi"):
        if key not in doc:
            raise SchemaError(f"{key}: missing required field")
    n = _int_field(doc, "n")
    if n < 2:
        raise SchemaError(f"n: must be >= 2, got {n}")
    h_raw = doc["h"]
    h = np.zeros((n, n, n))
    if not isinstance(h_raw, list) or len(h_raw) != n:
        raise SchemaError(f"h: expected {n} slices h[r], got {len(h_raw) if isinstance(h_raw, list) else type(h_raw).__name__}")
    for r, plane in enumerate(h_raw):
        if not isinstance(plane, list) or len(plane) != n:
            raise SchemaError(f"h[{r}]: expected {n} rows")
        for i, row in enumerate(plane):
            if not isinstance(row, list) or len(row) != n:
                raise SchemaError(f"h[{r}][{i}]: expected {n} entries")
            for j, v in enumerate(row):
                h[r, i, j] = _real(v, f"h[{r}][{i}][{j}]")
    tol = 1e-12 * max(1.0, float(np.max(np.abs(h))))
    for r in range(n):
        for i in range(n):
            for j in range(n):
                for rr, ii, jj in ((r, j, i), (i, r, j)):
                    if abs(h[r, i, j] - h[rr, ii, jj]) > tol:
                        raise SchemaError(
                            f"h[{r}][{i}][{j}]: not fully symmetric "
                            f"({h[r, i, j]!r} != h[{rr}][{ii}][{jj}] = {h[rr, ii, jj]!r})"
                        )
    abc = doc["abc"]
    if not isinstance(abc, dict):
        raise SchemaError("abc: expected an object with keys a, b, c")
    coeffs = []
    for k in ("a", "b", "c"):
        if k not in abc:
            raise SchemaError(f"abc.{k}: missing required field")
        coeffs.append(_real(abc[k], f"abc.{k}"))
    xi_raw = doc["xi"]
    if not isinstance(xi_raw, list) or len(xi_raw) != 2 * n:
        raise SchemaError(f"xi: expected {2 * n} numbers")
    xi = np.array([_real(v, f"xi[{k}]") for k, v in enumerate(xi_raw)])
    norm = float(np.linalg.norm(xi))
    if abs(norm - 1.0) > 1e-12:
        raise SchemaError(f"xi: must be a unit vector, |xi| = {norm!r}")
    try:
        return LagrangianPoint(SecondFundamentalForm(n, h), AmbientPoint(n, xi, tuple(coeffs)))
    except InvalidPoint as exc:
        raise SchemaError(f"instance: {exc}") from exc


# --------------------------------------------------------------------------
# reports

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "Fuzz verification report",
    "type": "object",
    "properties": {
        "schema_version": {"const": 1},
        "config": {
            "type": "object",
            "properties": {
                "theorem": {"enum": ["chen_ricci", "lower_bound", "delta_n", "quadform_psd",
                                     "ambient_sums", "angle_invariance"]},
                "n_range": {"type": "array", "items": {"type": "integer"}, "minItems": 2, "maxItems": 2},
                "trials": {"type": "integer", "minimum": 0},
                "seed": {"type": "integer"},
                "tolerance": {"type": "number", "minimum": 0},
            },
            "required": ["theorem", "n_range", "trials", "seed", "tolerance"],
        },
        "trials_run": {"type": "integer", "minimum": 0},
        "checked": {"type": "integer", "minimum": 0},
        "worst_violation": {"oneOf": [{"type": "number"}, {"const": "+inf"}]},
        "worst_raw_gap": {"oneOf": [{"type": "number"}, {"const": "+inf"}, {"type": "null"}]},
        "worst_instance": {"oneOf": [{"type": "null"}, {"type": "object"}]},
        "near_equality_instances": {"type": "array", "items": {"type": "object"}},
        "counters": {"type": "object", "additionalProperties": {"type": "integer"}},
        "passed": {"type": "boolean"},
        "verdict": {"type": "string"},
    },
    "required": ["schema_version", "config", "trials_run", "worst_violation", "worst_instance",
                 "near_equality_instances", "passed"],
}

SCHEMAS = {
    "params": PARAMS_SCHEMA,
    "instance": INSTANCE_SCHEMA,
    "certificate": CERTIFICATE_SCHEMA,
    "report": REPORT_SCHEMA,
}
