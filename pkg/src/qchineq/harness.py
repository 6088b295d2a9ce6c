"""Seeded instance generators and the fuzzing engine.

Every trial draws from its own generator, seeded by
``SeedSequence(seed, spawn_key=(trial_index,))``, so a trial's outcome does
not depend on which worker ran it.  Per-chunk partial results are merged by
``(gap, trial_index)``, which makes the final report independent of the
worker count and of completion order.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional, Union

import numpy as np

from . import ambient, lagrangian, quadform
from .lagrangian import LagrangianPoint, make_point
from .numerics import symmetric_eigen
from .quadform import SimpleFormParams, StructuredFormParams
from .schemas import SCHEMA_VERSION, encode_number, instance_to_dict, params_to_dict

THEOREMS = ("chen_ricci", "lower_bound", "delta_n", "quadform_psd", "ambient_sums", "angle_invariance")
# checks of identities rather than inequalities: every gap is ~0, so
# near-equality records carry no information
IDENTITY_CHECKS = ("ambient_sums", "angle_invariance")
SPECIAL_KINDS = ("totally_geodesic", "h_umbilical", "complex_space_form")
SeedLike = Union[int, np.random.Generator]

_SEED_MASK = (1 << 64) - 1


def _rng(seed: SeedLike) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(np.random.SeedSequence(int(seed) & _SEED_MASK))


def trial_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(int(seed) & _SEED_MASK, spawn_key=(index,)))


# --------------------------------------------------------------------------
# generators

def random_h(n: int, rng: np.random.Generator) -> np.ndarray:
    """Fully symmetric h, one uniform draw per multiset {r, i, j}."""
    h = np.zeros((n, n, n))
    for r in range(n):
        for i in range(r, n):
            for j in range(i, n):
                v = rng.uniform(-1.0, 1.0)
                for idx in {(r, i, j), (r, j, i), (i, r, j), (i, j, r), (j, r, i), (j, i, r)}:
                    h[idx] = v
    return h


def random_unit(dim: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def random_point(n: int, seed: SeedLike) -> LagrangianPoint:
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    rng = _rng(seed)
    h = random_h(n, rng)
    xi = random_unit(2 * n, rng)
    abc = tuple(rng.uniform(-2.0, 2.0, size=3))
    return make_point(h, xi, abc)


def h_umbilical_h(n: int, lam: float, mu: float) -> np.ndarray:
    """h(e1,e1) = lam J e1, h(ej,ej) = mu J e1, extended by full symmetry."""
    h = np.zeros((n, n, n))
    h[0, 0, 0] = lam
    for j in range(1, n):
        h[0, j, j] = h[j, 0, j] = h[j, j, 0] = mu
    return h


def special_point(
    kind: str,
    seed: SeedLike,
    n: int = 2,
    lam: Optional[float] = None,
    mu: Optional[float] = None,
    a: Optional[float] = None,
    abc: Optional[tuple[float, float, float]] = None,
) -> LagrangianPoint:
    """Constructed instances for the equality cases.

    ``h_umbilical`` takes b = c = 0 unless ``abc`` is given;
    ``complex_space_form`` draws h at random and sets b = c = 0.
    """
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    rng = _rng(seed)
    xi = random_unit(2 * n, rng)
    if kind == "totally_geodesic":
        if lam is not None or mu is not None:
            raise ValueError("totally_geodesic takes no lambda/mu")
        coeffs = abc if abc is not None else tuple(rng.uniform(-2.0, 2.0, size=3))
        return make_point(np.zeros((n, n, n)), xi, coeffs)
    if kind == "h_umbilical":
        if lam is None or mu is None:
            raise ValueError("h_umbilical requires lambda and mu")
        if abc is None:
            abc = (rng.uniform(-2.0, 2.0) if a is None else a, 0.0, 0.0)
        return make_point(h_umbilical_h(n, lam, mu), xi, abc)
    if kind == "complex_space_form":
        if abc is not None or lam is not None or mu is not None:
            raise ValueError("complex_space_form takes only a")
        h = random_h(n, rng)
        return make_point(h, xi, (rng.uniform(-2.0, 2.0) if a is None else a, 0.0, 0.0))
    raise ValueError(f"unknown kind {kind!r}; expected one of {SPECIAL_KINDS}")


def random_orthogonal(n: int, rng: np.random.Generator) -> np.ndarray:
    Q, R = np.linalg.qr(rng.standard_normal((n, n)))
    return Q * np.sign(np.diag(R))


# --------------------------------------------------------------------------
# configuration and report

@dataclass(frozen=True)
class FuzzConfig:
    theorem: str
    n_range: tuple[int, int]
    trials: int
    seed: int = 42
    tolerance: float = 1e-9
    vectors_per_point: int = 10
    near_equality_threshold: float = 1e-6
    max_near_records: int = 20
    special_every: int = 20  # every k-th trial is a constructed equality case; 0 disables
    delta_x: str = "argmin"

    def __post_init__(self):
        if self.theorem not in THEOREMS:
            raise ValueError(f"theorem: unknown {self.theorem!r}; expected one of {THEOREMS}")
        lo, hi = self.n_range
        object.__setattr__(self, "n_range", (int(lo), int(hi)))
        if lo > hi:
            raise ValueError(f"n_range: empty interval {lo}:{hi}")
        min_n = 3 if self.theorem in ("lower_bound", "delta_n") else 2
        if lo < min_n:
            raise ValueError(f"n_range: {self.theorem} requires n >= {min_n}, got {lo}")
        if self.trials < 0:
            raise ValueError("trials must be >= 0")
        if self.vectors_per_point < 1:
            raise ValueError("vectors_per_point must be >= 1")
        if self.tolerance < 0 or self.near_equality_threshold < 0:
            raise ValueError("tolerances must be non-negative")
        if self.delta_x not in ("argmin", "max"):
            raise ValueError(f"delta_x: expected 'argmin' or 'max', got {self.delta_x!r}")
        if self.special_every < 0:
            raise ValueError("special_every must be >= 0")


@dataclass(frozen=True)
class TrialRecord:
    index: int
    gap: float  # normalised by the instance scale
    raw_gap: float
    instance: dict

    def key(self):
        return (self.gap, self.index)


@dataclass
class _Partial:
    worst: Optional[TrialRecord] = None
    near: list = field(default_factory=list)
    near_total: int = 0
    checked: int = 0
    counters: dict = field(default_factory=dict)

    def bump(self, name: str, by: int = 1) -> None:
        self.counters[name] = self.counters.get(name, 0) + by


@dataclass
class VerificationReport:
    config: FuzzConfig
    trials_run: int
    checked: int
    worst_violation: float
    worst_raw_gap: Optional[float]
    worst_instance: Optional[dict]
    near_equality_instances: list
    near_equality_total: int
    counters: dict
    elapsed: float = 0.0

    @property
    def passed(self) -> bool:
        return bool(self.worst_violation >= -self.config.tolerance)

    @property
    def verdict(self) -> str:
        if self.checked == 0:
            return "no instances checked"
        if self.passed:
            return "no violation found"
        return (
            "VIOLATION: the inequality is a theorem, so this counterexample "
            "indicates an implementation bug"
        )

    def to_dict(self) -> dict:
        """JSON-ready dict.  ``elapsed`` is left out so reports are reproducible."""
        cfg = asdict(self.config)
        cfg["n_range"] = list(self.config.n_range)
        return {
            "schema_version": SCHEMA_VERSION,
            "config": cfg,
            "trials_run": self.trials_run,
            "checked": self.checked,
            "worst_violation": encode_number(self.worst_violation),
            "worst_raw_gap": None if self.worst_raw_gap is None else encode_number(self.worst_raw_gap),
            "worst_instance": self.worst_instance,
            "near_equality_instances": self.near_equality_instances,
            "near_equality_total": self.near_equality_total,
            "counters": dict(sorted(self.counters.items())),
            "passed": self.passed,
            "verdict": self.verdict,
        }


# --------------------------------------------------------------------------
# trials

def _draw_n(cfg: FuzzConfig, rng: np.random.Generator) -> int:
    lo, hi = cfg.n_range
    return int(rng.integers(lo, hi + 1))


def _lagrangian_instance(cfg: FuzzConfig, index: int, rng: np.random.Generator, part: _Partial):
    n = _draw_n(cfg, rng)
    if cfg.special_every and index % cfg.special_every == 0:
        part.bump("special_points")
        lo, _ = cfg.n_range
        if cfg.theorem == "chen_ricci" and lo == 2 and (index // cfg.special_every) % 2 == 1:
            mu = rng.uniform(-1.0, 1.0)
            return special_point("h_umbilical", rng, n=2, lam=3.0 * mu, mu=mu)
        return special_point("totally_geodesic", rng, n=n)
    return random_point(n, rng)


def _with_x(p: LagrangianPoint, X) -> dict:
    doc = instance_to_dict(p)
    if X is not None:
        doc["X"] = [float(v) for v in X]
    return doc


def _trial_lagrangian(cfg, index, rng, part):
    p = _lagrangian_instance(cfg, index, rng, part)
    s = lagrangian.scale(p)
    if cfg.theorem == "delta_n":
        gap = lagrangian.delta_n_bound(p, x_choice=cfg.delta_x) - lagrangian.delta_n(p)
        return gap, s, _with_x(p, None)
    if cfg.theorem == "chen_ricci":
        def g(X):
            return lagrangian.chen_ricci_bound(p, X) - lagrangian.ricci(p, X)
    else:
        def g(X):
            return lagrangian.ricci(p, X) - lagrangian.ricci_lower_bound(p, X)
    worst, worst_X = math.inf, None
    for _ in range(cfg.vectors_per_point):
        X = random_unit(p.n, rng)
        v = g(X)
        if v < worst:
            worst, worst_X = v, X
    return worst, s, _with_x(p, worst_X)


def _certified_structured(n: int, rng: np.random.Generator) -> StructuredFormParams:
    """Float parameters satisfying A1-A6 by construction (A6 via D3 = 0)."""
    while True:
        k1 = int(rng.integers(1, n - 1))
        k2 = n - 1 - k1
        beta = rng.uniform(-1.0, 1.0)
        p, q = rng.uniform(0.05, 2.0, size=2)
        a = rng.uniform(-1.0, 1.0)
        den = p * q + beta * (k2 * p + k1 * q)
        if den <= 0.05 or abs(p - q) < 1e-3:
            continue
        mu = a * a * (k1 * q + k2 * p) / den
        params = StructuredFormParams(mu, beta + p, beta + q, beta, a, k1, k2)
        if quadform.check_conditions(params).certified:
            return params


def _certified_simple(n: int, rng: np.random.Generator) -> SimpleFormParams:
    while True:
        beta = rng.uniform(-1.0, 1.0)
        alpha = beta + rng.uniform(0.05, 2.0)
        mu = rng.uniform(0.05, 2.0)
        s = alpha + (n - 2) * beta
        if s <= 0.05:
            continue
        a = math.copysign(math.sqrt(mu * s / (n - 1)), rng.uniform(-1.0, 1.0))
        params = SimpleFormParams(mu, alpha, beta, a, n)
        if quadform.check_conditions(params).certified:
            return params


def _a1_violating(n: int, rng: np.random.Generator) -> StructuredFormParams:
    """Structured parameters with alpha1 < beta and k1 >= 2, so A1 fails."""
    n = max(n, 4)
    k1 = int(rng.integers(2, n - 1))
    k2 = n - 1 - k1
    beta = rng.uniform(-1.0, 1.0)
    alpha1 = beta - rng.uniform(0.05, 2.0)
    alpha2 = beta + rng.uniform(0.05, 2.0)
    return StructuredFormParams(rng.uniform(0.05, 2.0), alpha1, alpha2, beta, rng.uniform(-1.0, 1.0), k1, k2)


def _trial_quadform(cfg, index, rng, part):
    n = _draw_n(cfg, rng)
    mode = index % 3
    if mode == 2:
        params = _a1_violating(n, rng)
        part.bump("a1_violations_injected")
    elif mode == 1 and n >= 3:
        params = _certified_structured(n, rng)
    else:
        params = _certified_simple(n, rng)
    cert = quadform.certify_psd(params)
    C = quadform.build_matrix(params).astype(float)
    norm = max(1.0, float(np.linalg.norm(C)))
    if not cert.certified:
        part.bump("undetermined")
        eig = symmetric_eigen(C)
        if eig.min < 0:
            x = eig.eigenvectors[:, 0]
            if quadform.evaluate(params, x) < 0:
                part.bump("oracle_negative_direction")
        return None
    part.bump("certified")
    eig = symmetric_eigen(C)
    gap = eig.min
    kernel = quadform.equality_kernel(params)
    for v in kernel.kernel_basis:
        v = np.asarray(v, dtype=float)
        residual = float(np.linalg.norm(C @ v)) / float(np.linalg.norm(v))
        gap = min(gap, -residual)
    return gap, norm, params_to_dict(params)


def _random_ambient(cfg, rng) -> ambient.AmbientPoint:
    n = _draw_n(cfg, rng)
    return ambient.AmbientPoint(n, random_unit(2 * n, rng), tuple(rng.uniform(-2.0, 2.0, size=3)))


def _ambient_doc(p: ambient.AmbientPoint) -> dict:
    a, b, c = p.abc
    return {"n": p.n, "abc": {"a": a, "b": b, "c": c}, "xi": [float(v) for v in p.xi]}


def _trial_ambient_sums(cfg, index, rng, part):
    p = _random_ambient(cfg, rng)
    Q = random_orthogonal(p.n, rng)
    closed = ambient.closed_form_sums(p, Q[:, 0])
    brute = ambient.brute_force_sums(p, Q)
    worst = max(abs(closed[k] - brute[k]) for k in ambient.SUM_NAMES)
    doc = _ambient_doc(p)
    doc["frame"] = Q.tolist()
    return -worst, 1.0 + p.n, doc


def _trial_angle(cfg, index, rng, part):
    p = _random_ambient(cfg, rng)
    t = rng.uniform(0.0, 1.0)
    X = ambient.vector_at_angle(p, t, rng)
    Y = ambient.vector_at_angle(p, t, rng)
    hx, _ = ambient.holomorphic_sectional_angle(p, X)
    hy, _ = ambient.holomorphic_sectional_angle(p, Y)
    a, b, c = p.abc
    doc = _ambient_doc(p)
    doc.update({"cos_sq": t, "X": X.tolist(), "Y": Y.tolist()})
    return -abs(hx - hy), 1.0 + abs(a) + abs(b) + abs(c), doc


_TRIALS = {
    "chen_ricci": _trial_lagrangian,
    "lower_bound": _trial_lagrangian,
    "delta_n": _trial_lagrangian,
    "quadform_psd": _trial_quadform,
    "ambient_sums": _trial_ambient_sums,
    "angle_invariance": _trial_angle,
}


# --------------------------------------------------------------------------
# engine

def _absorb(part: _Partial, rec: TrialRecord, cfg: FuzzConfig) -> None:
    part.checked += 1
    if part.worst is None or rec.key() < part.worst.key():
        part.worst = rec
    if cfg.theorem not in IDENTITY_CHECKS and rec.gap <= cfg.near_equality_threshold:
        part.near_total += 1
        part.near.append(rec)
        if len(part.near) > 2 * cfg.max_near_records:
            part.near.sort(key=TrialRecord.key)
            del part.near[cfg.max_near_records:]


def _run_chunk(cfg: FuzzConfig, start: int, stop: int) -> _Partial:
    part = _Partial()
    trial = _TRIALS[cfg.theorem]
    for index in range(start, stop):
        rng = trial_rng(cfg.seed, index)
        out = trial(cfg, index, rng, part)
        if out is None:
            continue
        raw, scale = float(out[0]), float(out[1])
        doc = dict(out[2], trial=index, scale=scale)
        _absorb(part, TrialRecord(index, raw / scale, raw, doc), cfg)
    part.near.sort(key=TrialRecord.key)
    del part.near[cfg.max_near_records:]
    return part


def _merge(parts: list[_Partial], cfg: FuzzConfig) -> _Partial:
    out = _Partial()
    for p in parts:
        out.checked += p.checked
        out.near_total += p.near_total
        for k, v in p.counters.items():
            out.bump(k, v)
        if p.worst is not None and (out.worst is None or p.worst.key() < out.worst.key()):
            out.worst = p.worst
        out.near.extend(p.near)
    out.near.sort(key=TrialRecord.key)
    del out.near[cfg.max_near_records:]
    return out


def _chunks(trials: int, pieces: int) -> list[tuple[int, int]]:
    pieces = max(1, min(pieces, trials))
    bounds = [trials * k // pieces for k in range(pieces + 1)]
    return [(bounds[k], bounds[k + 1]) for k in range(pieces) if bounds[k] < bounds[k + 1]]


def run_fuzz(config: FuzzConfig, workers: int = 1) -> VerificationReport:
    """Run ``config.trials`` trials; the result does not depend on ``workers``."""
    t0 = time.perf_counter()
    if config.trials == 0:
        merged = _Partial()
    elif workers <= 1:
        merged = _merge([_run_chunk(config, 0, config.trials)], config)
    else:
        spans = _chunks(config.trials, 4 * workers)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_run_chunk, config, a, b) for a, b in spans]
            merged = _merge([f.result() for f in futures], config)
    worst = merged.worst
    return VerificationReport(
        config=config,
        trials_run=config.trials,
        checked=merged.checked,
        worst_violation=math.inf if worst is None else worst.gap,
        worst_raw_gap=None if worst is None else worst.raw_gap,
        worst_instance=None if worst is None else worst.instance,
        near_equality_instances=[
            {"trial": r.index, "gap": r.gap, "instance": r.instance} for r in merged.near
        ],
        near_equality_total=merged.near_total,
        counters=merged.counters,
        elapsed=time.perf_counter() - t0,
    )
