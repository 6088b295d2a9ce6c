import json
import math

import numpy as np
import pytest

from qchineq import harness as hz
from qchineq import lagrangian as lg
from qchineq.harness import FuzzConfig, run_fuzz


def test_random_point_is_deterministic():
    p, q = hz.random_point(4, 123), hz.random_point(4, 123)
    assert np.array_equal(p.h.coeffs, q.h.coeffs)
    assert np.array_equal(p.ambient.xi, q.ambient.xi)
    assert p.abc == q.abc
    assert not np.array_equal(p.h.coeffs, hz.random_point(4, 124).h.coeffs)


def test_random_point_sampling_ranges():
    hs = np.stack([hz.random_point(4, s).h.coeffs for s in range(1000)])
    assert np.all(np.abs(hs) <= 1)
    assert np.max(np.abs(hs.mean(axis=0))) < 0.05
    abcs = np.array([hz.random_point(3, s).abc for s in range(200)])
    assert np.all(np.abs(abcs) <= 2)


def test_random_point_rejects_small_n():
    with pytest.raises(ValueError):
        hz.random_point(1, 0)


def test_special_points():
    tg = hz.special_point("totally_geodesic", 0, n=5)
    assert not np.any(tg.h.coeffs)
    assert lg.classify_point(tg).kind == "TotallyGeodesic"
    hu = hz.special_point("h_umbilical", 0, n=2, lam=3.0, mu=1.0)
    assert hu.abc[1:] == (0.0, 0.0)
    assert lg.classify_point(hu).kind == "HUmbilicalLambda3Mu"
    assert lg.equality_gap_everywhere(hu)[0] <= 1e-10
    hu3 = hz.special_point("h_umbilical", 0, n=3, lam=3.0, mu=1.0)
    assert lg.equality_gap_everywhere(hu3)[0] > 0
    csf = hz.special_point("complex_space_form", 0, n=4, a=1.5)
    assert csf.abc == (1.5, 0.0, 0.0)


def test_special_point_errors():
    with pytest.raises(ValueError):
        hz.special_point("h_umbilical", 0, n=2, lam=3.0)
    with pytest.raises(ValueError):
        hz.special_point("totally_geodesic", 0, n=2, lam=1.0, mu=1.0)
    with pytest.raises(ValueError):
        hz.special_point("sphere", 0, n=2)
    with pytest.raises(ValueError):
        hz.special_point("complex_space_form", 0, n=2, abc=(1, 1, 1))


def test_config_validation():
    with pytest.raises(ValueError):
        FuzzConfig("lower_bound", (2, 4), 10)
    with pytest.raises(ValueError):
        FuzzConfig("delta_n", (2, 4), 10)
    with pytest.raises(ValueError):
        FuzzConfig("nope", (3, 4), 10)
    with pytest.raises(ValueError):
        FuzzConfig("chen_ricci", (5, 4), 10)
    with pytest.raises(ValueError):
        FuzzConfig("chen_ricci", (2, 4), -1)
    with pytest.raises(ValueError):
        FuzzConfig("delta_n", (3, 4), 10, delta_x="mid")


def test_zero_trials():
    r = run_fuzz(FuzzConfig("chen_ricci", (2, 4), 0))
    assert r.worst_violation == math.inf
    assert r.worst_instance is None and r.near_equality_instances == []
    assert r.passed
    assert r.to_dict()["worst_violation"] == "+inf"


@pytest.mark.parametrize(
    "theorem,n_range",
    [("chen_ricci", (2, 6)), ("lower_bound", (3, 6)), ("delta_n", (3, 6)),
     ("quadform_psd", (2, 10)), ("ambient_sums", (2, 8)), ("angle_invariance", (2, 8))],
)
def test_every_theorem_passes_small_campaign(theorem, n_range):
    r = run_fuzz(FuzzConfig(theorem, n_range, 200, seed=3))
    assert r.passed, r.to_dict()["worst_instance"]
    assert r.checked > 0
    assert r.worst_instance is not None


def test_quadform_campaign_exercises_undetermined_path():
    r = run_fuzz(FuzzConfig("quadform_psd", (3, 8), 90, seed=1))
    c = r.counters
    assert c["a1_violations_injected"] == 30
    assert c["undetermined"] >= 30
    assert c["oracle_negative_direction"] >= 30
    assert c["certified"] + c["undetermined"] == 90


def test_special_points_are_near_equality_not_violations():
    cfg = FuzzConfig("chen_ricci", (2, 3), 200, seed=9, special_every=10)
    r = run_fuzz(cfg)
    assert r.passed
    assert r.counters["special_points"] == 20
    assert r.near_equality_total >= 20
    gaps = [(rec["gap"], rec["trial"]) for rec in r.near_equality_instances]
    assert gaps == sorted(gaps)
    assert len(gaps) <= cfg.max_near_records


def test_report_is_independent_of_worker_count():
    cfg = FuzzConfig("delta_n", (3, 5), 120, seed=77)
    a = json.dumps(run_fuzz(cfg).to_dict())
    b = json.dumps(run_fuzz(cfg, workers=3).to_dict())
    assert a == b


def test_chunking_does_not_change_result():
    cfg = FuzzConfig("chen_ricci", (2, 6), 97, seed=5)
    whole = hz._merge([hz._run_chunk(cfg, 0, 97)], cfg)
    pieces = hz._merge([hz._run_chunk(cfg, a, b) for a, b in reversed(hz._chunks(97, 7))], cfg)
    assert whole.worst == pieces.worst
    assert [r.key() for r in whole.near] == [r.key() for r in pieces.near]
    assert whole.counters == pieces.counters


def test_violation_is_reported(monkeypatch):
    # a deliberately broken bound must be caught, with a dump of the instance
    monkeypatch.setattr(lg, "chen_ricci_bound", lambda p, X: lg.ricci(p, X) - 1.0)
    r = run_fuzz(FuzzConfig("chen_ricci", (2, 3), 5, seed=0))
    assert not r.passed
    doc = r.to_dict()
    assert "implementation bug" in doc["verdict"]
    inst = doc["worst_instance"]
    assert {"n", "h", "abc", "xi", "X", "trial", "scale"} <= set(inst)


def test_elapsed_not_serialised():
    r = run_fuzz(FuzzConfig("angle_invariance", (2, 3), 3))
    assert r.elapsed > 0
    assert "elapsed" not in r.to_dict()
