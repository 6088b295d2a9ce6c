"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

The lines are also collected into an "acceptance criteria" section of the
pytest terminal summary (see conftest.py).
"""

import json
import time
from fractions import Fraction as F

import numpy as np

from qchineq import ambient as amb
from qchineq import cli
from qchineq import lagrangian as lg
from qchineq import quadform as qf
from qchineq.harness import THEOREMS, FuzzConfig, random_orthogonal, run_fuzz, special_point
from qchineq.numerics import spectra_match


# --------------------------------------------------------------------------
# 1. spectrum correctness

def _random_params(rng, structured):
    mu, al1, al2, be, a = rng.uniform(-3, 3, size=5)
    if structured:
        k1 = int(rng.integers(0, 12))
        k2 = int(rng.integers(max(0, 2 - k1), 12 - k1))
        return qf.StructuredFormParams(mu, al1, al2, be, a, k1, k2)
    return qf.SimpleFormParams(mu, al1, be, a, int(rng.integers(2, 13)))


def test_1_spectrum_matches_oracle(verdict):
    rng = np.random.default_rng(42)
    start = time.perf_counter()
    mismatches = []
    for structured in (True, False):
        for _ in range(1000):
            p = _random_params(rng, structured)
            closed = qf.spectrum_factorization(p).eigenvalues()
            if not spectra_match(closed, qf.oracle_spectrum(p), 1e-8):
                mismatches.append(p)
    elapsed = time.perf_counter() - start
    ok = not mismatches and elapsed < 30
    verdict("1 spectrum correctness", ok, f"2000 forms, {len(mismatches)} mismatches, {elapsed:.1f}s")
    assert not mismatches, mismatches[:3]
    assert elapsed < 30


# --------------------------------------------------------------------------
# 2. example certification

def _rank(vectors):
    rows = [list(v) for v in vectors]
    rank, col, width = 0, 0, len(rows[0]) if rows else 0
    while rank < len(rows) and col < width:
        piv = next((i for i in range(rank, len(rows)) if rows[i][col] != 0), None)
        if piv is None:
            col += 1
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        for i in range(rank + 1, len(rows)):
            f = rows[i][col] / rows[rank][col]
            rows[i] = [x - f * y for x, y in zip(rows[i], rows[rank])]
        rank += 1
        col += 1
    return rank


def _cells():
    for name in qf.EXAMPLES:
        lo = 3 if name.startswith("oprea") else 2
        for n in range(lo, 21):
            rs = range(2, n + 1) if name == "oprea_4_27" else (None,)
            for r in rs:
                yield name, n, r


def test_2_examples_certified_exactly(verdict):
    failures = []
    count = 0
    for name, n, r in _cells():
        count += 1
        ex = qf.named_example(name, n, r)
        p = ex.params
        C = qf.build_matrix(p)
        cond = qf.check_conditions(p)
        kernel = qf.equality_kernel(p)
        basis = [tuple(F(x) for x in v) for v in kernel.kernel_basis]
        ok = p.exact and cond.certified and len(basis) == kernel.kernel_dim > 0
        # the basis spans ker C exactly
        ok = ok and all(all(sum(C[i][j] * v[j] for j in range(n)) == 0 for i in range(n)) for v in basis)
        ok = ok and _rank(basis) == len(basis) == qf.spectrum_factorization(p).zero_multiplicity()
        for y in ex.equality_vectors:
            x = ex.to_x(y)
            ok = ok and all(sum(C[i][j] * x[j] for j in range(n)) == 0 for i in range(n))
            ok = ok and _rank(basis + [tuple(x)]) == len(basis)
        if not ok:
            failures.append((name, n, r))
    verdict("2 example certification", not failures, f"{count} cells, failures {failures[:5]}")
    assert not failures


# --------------------------------------------------------------------------
# 3. classical inequalities

def test_3_classical_inequalities(verdict):
    rng = np.random.default_rng(3)
    worst = np.inf
    checked = 0
    for n in range(2, 9):
        for name in qf.EXAMPLES:
            if name.startswith("oprea") and n < 3:
                continue
            ex = qf.named_example(name, n)
            Y = rng.standard_normal((10_000, n))
            # a tenth of the samples sit next to the equality set
            eq = np.array([[float(v) for v in e] for e in ex.equality_vectors])
            near = rng.standard_normal((1000, len(eq))) @ eq + 1e-6 * rng.standard_normal((1000, n))
            Y[:1000] = near
            rs = rng.integers(2, n + 1, size=len(Y)) if name == "oprea_4_27" else [None] * len(Y)
            if name == "oprea_4_27":
                gaps = np.array([qf.classical_gap(name, y, int(r)) for y, r in zip(Y, rs)], dtype=float)
            else:
                gaps = np.asarray(qf.classical_gap(name, list(Y.T)), dtype=float)
            scale = n * np.sum(Y * Y, axis=1)
            worst = min(worst, float(np.min(gaps / scale)))
            checked += len(Y)
    ok = worst >= -1e-10
    verdict("3 classical inequalities", ok, f"{checked} vectors, worst normalized gap {worst:.3e}")
    assert ok


# --------------------------------------------------------------------------
# 4-6. fuzz campaigns

def _campaign(theorem, n_range, budget=None):
    cfg = FuzzConfig(theorem, n_range, 10_000, seed=42)
    start = time.perf_counter()
    report = run_fuzz(cfg)
    elapsed = time.perf_counter() - start
    ok = report.passed and report.trials_run == 10_000 and (budget is None or elapsed < budget)
    per_point = "" if theorem == "delta_n" else f" x {cfg.vectors_per_point} vectors"
    detail = f"worst {report.worst_violation:.3e}, {report.checked} points{per_point}, {elapsed:.1f}s"
    return ok, detail, report, elapsed


def test_4_chen_ricci_fuzz(verdict):
    ok, detail, report, elapsed = _campaign("chen_ricci", (2, 6), budget=60)
    verdict("4 chen-ricci fuzz", ok, detail)
    # each trial takes the worst of its 10 unit vectors
    assert report.config.vectors_per_point == 10 and report.checked == 10_000
    assert report.passed and elapsed < 60


def test_5_lower_bound_fuzz(verdict):
    ok, detail, report, _ = _campaign("lower_bound", (3, 6))
    verdict("5 lower-bound fuzz", ok, detail)
    assert report.passed


def test_6_delta_n_fuzz_and_reduction(verdict):
    ok, detail, report, _ = _campaign("delta_n", (3, 6))
    worst = 0.0
    for seed in range(1000):
        n = 3 + seed % 4
        p = special_point("complex_space_form", seed, n=n)
        reduced = lg.delta_n_reduced_bound(n, p.abc[0], lg.mean_curvature_sq(p))
        worst = max(worst, abs(lg.delta_n_bound(p) - reduced) / lg.scale(p))
    ok = ok and worst <= 1e-12
    verdict("6 delta_n fuzz", ok, f"{detail}; b=c=0 reduction error {worst:.1e}")
    assert report.passed
    assert worst <= 1e-12


# --------------------------------------------------------------------------
# 7. equality cases

def _dyadic_geodesic(rng, n):
    xi = np.zeros(2 * n)
    xi[rng.choice(2 * n, 4, replace=False)] = rng.choice([-0.5, 0.5], 4)
    abc = tuple(float(v) for v in rng.integers(-16, 17, size=3) / 4)
    return lg.make_point(np.zeros((n, n, n)), xi, abc)


def test_7_equality_cases(verdict):
    rng = np.random.default_rng(7)
    tg_worst = 0.0
    for seed in range(500):
        n = 2 + seed % 7
        p = special_point("totally_geodesic", seed, n=n)
        hi, _ = lg.equality_gap_everywhere(p)
        lo, _ = lg.min_gap(p)
        tg_worst = max(tg_worst, abs(hi) / lg.scale(p), abs(lo) / lg.scale(p))

    # with dyadic data every float operation is exact, so the gap is exactly 0
    exact = all(
        not np.any(lg.gap_operator(_dyadic_geodesic(rng, n), "lower_bound"))
        for n in range(3, 9)
        for _ in range(50)
    )

    hu_worst, perturbed_min = 0.0, np.inf
    for seed in range(500):
        mu = float(rng.uniform(-2, 2))
        Q = random_orthogonal(2, rng)
        p = special_point("h_umbilical", seed, n=2, lam=3 * mu, mu=mu).rotate(Q)
        hu_worst = max(hu_worst, abs(lg.equality_gap_everywhere(p)[0]) / lg.scale(p))
        q = special_point("h_umbilical", seed, n=2, lam=3 * mu + 0.1, mu=mu).rotate(Q)
        perturbed_min = min(perturbed_min, lg.equality_gap_everywhere(q)[0])

    ok = tg_worst <= 1e-12 and exact and hu_worst <= 1e-10 and perturbed_min > 0
    verdict(
        "7 equality cases",
        ok,
        f"geodesic gap {tg_worst:.1e}, exact lower-bound equality {exact}, "
        f"lambda=3mu gap {hu_worst:.1e}, perturbed min gap {perturbed_min:.3e}",
    )
    assert tg_worst <= 1e-12
    assert exact
    assert hu_worst <= 1e-10
    assert perturbed_min > 0


# --------------------------------------------------------------------------
# 8. oracle cross-checks

def _ambient(rng, n):
    xi = rng.standard_normal(2 * n)
    return amb.AmbientPoint(n, xi / np.linalg.norm(xi), tuple(float(v) for v in rng.uniform(-2, 2, size=3)))


def test_8_oracle_cross_checks(verdict):
    rng = np.random.default_rng(8)
    sums_err = 0.0
    for _ in range(500):
        p = _ambient(rng, int(rng.integers(2, 9)))
        frame = random_orthogonal(p.n, rng)
        closed = amb.closed_form_sums(p, frame[:, 0])
        brute = amb.brute_force_sums(p, frame)
        sums_err = max(sums_err, max(abs(closed[k] - brute[k]) for k in amb.SUM_NAMES))

    R, J = amb.qch_curvature, amb.complex_structure
    ident_err = 0.0
    for _ in range(1000):
        p = _ambient(rng, int(rng.integers(2, 9)))
        X, Y, Z, U = (v / np.linalg.norm(v) for v in rng.standard_normal((4, 2 * p.n)))
        v = R(p, X, Y, Z, U)
        ident_err = max(
            ident_err,
            abs(R(p, Y, X, Z, U) + v),
            abs(R(p, X, Y, U, Z) + v),
            abs(R(p, Z, U, X, Y) - v),
            abs(v + R(p, Y, Z, X, U) + R(p, Z, X, Y, U)),
            abs(R(p, J(X), J(Y), Z, U) - v),
        )

    angle_err = 0.0
    for _ in range(100):
        p = _ambient(rng, int(rng.integers(2, 9)))
        t = float(rng.uniform(0, 1))
        k1, _ = amb.holomorphic_sectional_angle(p, amb.vector_at_angle(p, t, rng))
        k2, _ = amb.holomorphic_sectional_angle(p, amb.vector_at_angle(p, t, rng))
        angle_err = max(angle_err, abs(k1 - k2))

    ok = sums_err <= 1e-10 and ident_err <= 1e-10 and angle_err <= 1e-9
    verdict(
        "8 oracle cross-checks",
        ok,
        f"frame sums {sums_err:.1e}, curvature identities {ident_err:.1e}, angle pairs {angle_err:.1e}",
    )
    assert ok


# --------------------------------------------------------------------------
# 9. determinism

def test_9_determinism(verdict, tmp_path, capsys):
    differing = []
    for theorem in THEOREMS:
        n_range = (3, 6) if theorem in ("lower_bound", "delta_n") else (2, 6)
        cfg = FuzzConfig(theorem, n_range, 300, seed=42)
        blobs = {json.dumps(run_fuzz(cfg, workers=w).to_dict()) for w in (1, 1, 2, 4)}
        if len(blobs) != 1:
            differing.append(theorem)

    args = ["fuzz", "--theorem", "chen-ricci", "--n", "2:6", "--trials", "500", "--seed", "42"]
    outs = []
    for i, w in enumerate((1, 1, 3)):
        path = tmp_path / f"report{i}.json"
        assert cli.main(args + ["--workers", str(w), "--out", str(path)]) == 0
        outs.append(path.read_bytes())
    capsys.readouterr()
    if len(set(outs)) != 1:
        differing.append("cli")

    ok = not differing
    verdict("9 determinism", ok, f"{len(THEOREMS)} theorems x worker counts 1,1,2,4 and CLI; differing {differing}")
    assert ok
