import json
from fractions import Fraction as F

import jsonschema
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qchineq import quadform as qf
from qchineq.harness import FuzzConfig, random_point, run_fuzz
from qchineq.schemas import (
    SCHEMAS,
    SchemaError,
    certificate_to_dict,
    instance_from_dict,
    instance_to_dict,
    params_from_dict,
    params_to_dict,
)

fractions = st.fractions(max_denominator=1000).filter(lambda f: abs(f) < 10**6)


def roundtrip(doc):
    return json.loads(json.dumps(doc))


@pytest.mark.parametrize("schema", list(SCHEMAS.values()))
def test_schemas_are_valid(schema):
    jsonschema.Draft202012Validator.check_schema(schema)


@given(fractions, fractions, fractions, fractions, st.integers(2, 30))
def test_simple_params_roundtrip(mu, al, be, a, n):
    p = qf.SimpleFormParams(mu, al, be, a, n)
    doc = roundtrip(params_to_dict(p))
    jsonschema.validate(doc, SCHEMAS["params"])
    assert params_from_dict(doc) == p


def test_structured_params_roundtrip_float_and_exact():
    for p in (qf.named_example("oprea_4_27", 7, 3).params,
              qf.StructuredFormParams(0.5, 1.25, -2.0, 0.1, 3.0, 2, 4)):
        doc = roundtrip(params_to_dict(p))
        jsonschema.validate(doc, SCHEMAS["params"])
        assert params_from_dict(doc) == p


@pytest.mark.parametrize(
    "doc,field",
    [
        ([], "params"),
        ({"form": "matrix"}, "form"),
        ({"form": "simple", "mu": 1, "alpha": 1, "beta": 0, "n": 3}, "a"),
        ({"form": "simple", "mu": 1, "alpha": 1, "beta": 0, "a": "x", "n": 3}, "a"),
        ({"form": "simple", "mu": 1, "alpha": 1, "beta": 0, "a": {"num": 1, "den": 0}, "n": 3}, "a"),
        ({"form": "simple", "mu": 1, "alpha": 1, "beta": 0, "a": 0, "n": 2.5}, "n"),
        ({"form": "simple", "mu": 1, "alpha": 1, "beta": 0, "a": 0, "n": 3, "k1": 1}, "k1"),
        ({"form": "structured", "mu": 1, "alpha1": 1, "alpha2": 1, "beta": 0, "a": 0, "k1": 1, "k2": 1}, "params"),
        ({"schema_version": 2, "form": "simple", "mu": 1, "alpha": 1, "beta": 0, "a": 0, "n": 3}, "schema_version"),
    ],
)
def test_params_errors_name_the_field(doc, field):
    with pytest.raises(SchemaError, match=f"^{field}"):
        params_from_dict(doc)


def test_certificate_documents_validate():
    ex = qf.named_example("deng_3_3", 4)
    cert = qf.certify_psd(ex.params)
    doc = roundtrip(certificate_to_dict(ex.params, cert, kernel=qf.equality_kernel(ex.params)))
    jsonschema.validate(doc, SCHEMAS["certificate"])
    assert doc["kernel"]["case"] == "B3'"
    p = qf.SimpleFormParams(1.0, 1.0, 0.0, 0.0, 3)
    doc = roundtrip(certificate_to_dict(p, qf.certify_psd(p), oracle=qf.oracle_spectrum(p)))
    jsonschema.validate(doc, SCHEMAS["certificate"])
    assert doc["kernel"] is None and doc["oracle_spectrum"] == [1.0, 1.0, 1.0]


def test_instance_roundtrip():
    p = random_point(4, 3)
    doc = roundtrip(instance_to_dict(p))
    jsonschema.validate(doc, SCHEMAS["instance"])
    q = instance_from_dict(doc)
    assert np.array_equal(p.h.coeffs, q.h.coeffs)
    assert np.array_equal(p.ambient.xi, q.ambient.xi)
    assert p.abc == q.abc


def _bad_instance(mutate):
    doc = roundtrip(instance_to_dict(random_point(3, 1)))
    mutate(doc)
    return doc


@pytest.mark.parametrize(
    "mutate,field",
    [
        (lambda d: d.pop("xi"), "xi"),
        (lambda d: d.__setitem__("n", 1), "n"),
        (lambda d: d["h"][0][1].__setitem__(2, 5.0), r"h\[0\]\[1\]\[2\]"),
        (lambda d: d["h"][2].pop(), r"h\[2\]"),
        (lambda d: d["abc"].pop("c"), r"abc\.c"),
        (lambda d: d["abc"].__setitem__("b", "big"), r"abc\.b"),
        (lambda d: d["xi"].__setitem__(0, d["xi"][0] + 0.1), "xi"),
        (lambda d: d["xi"].append(0.0), "xi"),
    ],
)
def test_instance_errors_name_the_field(mutate, field):
    with pytest.raises(SchemaError, match=f"^{field}"):
        instance_from_dict(_bad_instance(mutate))


def test_report_validates():
    doc = roundtrip(run_fuzz(FuzzConfig("lower_bound", (3, 4), 30, seed=2)).to_dict())
    jsonschema.validate(doc, SCHEMAS["report"])
    instance_from_dict({k: doc["worst_instance"][k] for k in ("n", "h", "abc", "xi")})
    empty = roundtrip(run_fuzz(FuzzConfig("chen_ricci", (2, 2), 0)).to_dict())
    jsonschema.validate(empty, SCHEMAS["report"])


def test_rational_encoding():
    doc = params_to_dict(qf.SimpleFormParams(F(-3, 8), 1, 0.5, F(2), 2))
    assert doc["mu"] == {"num": -3, "den": 8}
    assert doc["alpha"] == 1 and doc["beta"] == 0.5
    assert doc["a"] == {"num": 2, "den": 1}
