"""Structured quadratic forms with closed-form spectra and PSD certificates.

Two families are handled.  The *structured* form on R^n (n = k1 + k2 + 1)

    f(x) = mu x1^2 + alpha1 * sum_{block 1} xi^2 + alpha2 * sum_{block 2} xi^2
           + 2a * x1 * sum_{i>=2} xi + 2 beta * sum_{2<=i<j} xi xj

and the *simple* form, which is the same thing with a single block.  Index 0
(x1) is the distinguished coordinate, indices 1..k1 form block 1 and the rest
block 2.

Parameters may be ``int``/``Fraction`` (exact mode: every derived quantity is
rational and tolerances are ignored) or floats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Sequence, Union

import numpy as np

DEFAULT_TOL = 1e-10

STRUCTURED_LABELS = ("A1", "A2", "A3", "A4", "A5", "A6")
SIMPLE_LABELS = ("A1'", "A2'", "A3'", "A4'", "A5'")


class InvalidParams(ValueError):
    pass


class PreconditionError(RuntimeError):
    pass


def _is_exact(v) -> bool:
    return isinstance(v, Rational) and not isinstance(v, bool)


def _check_int(name: str, v) -> None:
    if isinstance(v, bool) or not isinstance(v, (int, np.integer)):
        raise InvalidParams(f"{name} must be an integer, got {v!r}")


@dataclass(frozen=True)
class StructuredFormParams:
    mu: float
    alpha1: float
    alpha2: float
    beta: float
    a: float
    k1: int
    k2: int

    def __post_init__(self):
        _check_int("k1", self.k1)
        _check_int("k2", self.k2)
        if self.k1 < 0 or self.k2 < 0:
            raise InvalidParams(f"block sizes must be non-negative, got k1={self.k1}, k2={self.k2}")
        if self.n < 3:
            raise InvalidParams(f"structured form needs n = k1 + k2 + 1 >= 3, got n={self.n}")
        if self.alpha1 == self.alpha2:
            raise InvalidParams("structured form needs alpha1 != alpha2 (use SimpleFormParams)")

    @property
    def n(self) -> int:
        return int(self.k1) + int(self.k2) + 1

    @property
    def exact(self) -> bool:
        return all(_is_exact(v) for v in (self.mu, self.alpha1, self.alpha2, self.beta, self.a))

    @property
    def degenerate(self) -> bool:
        """One block is empty; the form is then a simple form."""
        return self.k1 == 0 or self.k2 == 0

    def as_simple(self) -> "SimpleFormParams":
        alpha = self.alpha2 if self.k1 == 0 else self.alpha1
        return SimpleFormParams(self.mu, alpha, self.beta, self.a, self.n)


@dataclass(frozen=True)
class SimpleFormParams:
    mu: float
    alpha: float
    beta: float
    a: float
    n: int

    def __post_init__(self):
        _check_int("n", self.n)
        if self.n < 2:
            raise InvalidParams(f"simple form needs n >= 2, got n={self.n}")

    @property
    def exact(self) -> bool:
        return all(_is_exact(v) for v in (self.mu, self.alpha, self.beta, self.a))


FormParams = Union[StructuredFormParams, SimpleFormParams]


def _blocks(params: FormParams) -> tuple[tuple[int, int, object], ...]:
    """(start, stop, diagonal value) for each non-empty block."""
    n = params.n
    if isinstance(params, SimpleFormParams):
        return ((1, n, params.alpha),)
    k1 = int(params.k1)
    out = []
    if k1:
        out.append((1, 1 + k1, params.alpha1))
    if params.k2:
        out.append((1 + k1, n, params.alpha2))
    return tuple(out)


def _zero(params: FormParams):
    return Fraction(0) if params.exact else 0.0


def _coerce(params: FormParams, v):
    return Fraction(v) if params.exact else float(v)


def build_matrix(params: FormParams) -> np.ndarray:
    """Symmetric matrix C with x^T C x = f(x).

    In exact mode the result is an object array of ``Fraction``.
    """
    n = params.n
    if params.exact:
        C = np.empty((n, n), dtype=object)
        C[:] = Fraction(params.beta)
    else:
        C = np.full((n, n), float(params.beta))
    C[0, :] = _coerce(params, params.a)
    C[:, 0] = _coerce(params, params.a)
    C[0, 0] = _coerce(params, params.mu)
    for start, stop, alpha in _blocks(params):
        for i in range(start, stop):
            C[i, i] = _coerce(params, alpha)
    return C


def evaluate(params: FormParams, x: Sequence) -> float:
    """f(x) from the polynomial definition (no matrix involved)."""
    x = list(x)
    if len(x) != params.n:
        raise InvalidParams(f"expected a vector of length {params.n}, got {len(x)}")
    tail = x[1:]
    s = sum(tail, _zero(params))
    sq = sum((v * v for v in tail), _zero(params))
    value = params.mu * x[0] * x[0]
    for start, stop, alpha in _blocks(params):
        value += alpha * sum((x[i] * x[i] for i in range(start, stop)), _zero(params))
    value += 2 * params.a * x[0] * s
    # 2 * sum_{i<j} xi xj = s^2 - sum xi^2
    value += params.beta * (s * s - sq)
    return value


# --------------------------------------------------------------------------
# spectrum

@dataclass(frozen=True)
class SpectrumFactorization:
    """det(lambda I - C) = prod (lambda - v)^m  *  tail(lambda).

    ``tail_coeffs`` are (e1, e2[, e3]) with tail = lambda^3 - e1 lambda^2 +
    e2 lambda - e3 (or the quadratic analogue), i.e. the elementary
    symmetric functions of the tail roots.
    """

    linear_factors: tuple[tuple[object, int], ...]
    tail_coeffs: tuple[object, ...]

    @property
    def degree(self) -> int:
        return sum(m for _, m in self.linear_factors) + len(self.tail_coeffs)

    def tail_roots(self) -> np.ndarray:
        c = [float(v) for v in self.tail_coeffs]
        if len(c) == 2:
            return _quadratic_roots(*c)
        return _cubic_roots(*c)

    def eigenvalues(self) -> np.ndarray:
        vals = [float(v) for v, m in self.linear_factors for _ in range(m)]
        return np.sort(np.concatenate([np.asarray(vals, dtype=float), self.tail_roots()]))

    def zero_multiplicity(self, tol: float = 0.0) -> int:
        """Number of eigenvalues that vanish (exactly in exact mode)."""
        exact = all(_is_exact(v) for v, _ in self.linear_factors) and all(
            _is_exact(v) for v in self.tail_coeffs
        )
        count = 0
        for v, m in self.linear_factors:
            if (v == 0) if exact else abs(float(v)) <= tol:
                count += m
        if exact:
            # trailing zero coefficients <=> zero roots of the tail
            for c in reversed(self.tail_coeffs):
                if c != 0:
                    break
                count += 1
        else:
            count += int(np.sum(np.abs(self.tail_roots()) <= tol))
        return count


def _quadratic_roots(e1: float, e2: float) -> np.ndarray:
    # lambda^2 - e1 lambda + e2; real for symmetric matrices
    disc = max(e1 * e1 - 4.0 * e2, 0.0)
    q = 0.5 * (e1 + math.copysign(math.sqrt(disc), e1))
    if q == 0.0:
        return np.zeros(2)
    return np.sort(np.array([q, e2 / q]))


def _cubic_roots(e1: float, e2: float, e3: float) -> np.ndarray:
    """Real roots of lambda^3 - e1 lambda^2 + e2 lambda - e3 (three real roots assumed)."""
    shift = e1 / 3.0
    p = e2 - e1 * e1 / 3.0
    q = -2.0 * e1 ** 3 / 27.0 + e1 * e2 / 3.0 - e3
    if p >= 0.0:
        # only a (numerically) triple root is consistent with real roots
        t = -math.copysign(abs(q) ** (1.0 / 3.0), q)
        roots = np.full(3, t + shift)
    else:
        m = 2.0 * math.sqrt(-p / 3.0)
        arg = 3.0 * q / (p * m)
        arg = min(1.0, max(-1.0, arg))
        phi = math.acos(arg) / 3.0
        roots = np.array([m * math.cos(phi - 2.0 * math.pi * k / 3.0) for k in range(3)]) + shift

    def poly(x):
        return ((x - e1) * x + e2) * x - e3

    def dpoly(x):
        return (3.0 * x - 2.0 * e1) * x + e2

    for i in range(3):
        x = roots[i]
        for _ in range(3):
            d = dpoly(x)
            if d == 0.0:
                break
            step = poly(x) / d
            nx = x - step
            if abs(poly(nx)) >= abs(poly(x)):
                break
            x = nx
        roots[i] = x
    return np.sort(roots)


def _simple_factorization(mu, alpha, beta, a, n) -> SpectrumFactorization:
    return SpectrumFactorization(
        linear_factors=((alpha - beta, n - 2),),
        tail_coeffs=(
            mu + alpha + (n - 2) * beta,
            mu * alpha + (n - 2) * mu * beta - (n - 1) * a * a,
        ),
    )


def _structured_coeffs(P: StructuredFormParams):
    mu, al1, al2, be, a, k1, k2 = P.mu, P.alpha1, P.alpha2, P.beta, P.a, P.k1, P.k2
    n = P.n
    d1 = al1 + al2 + mu + (n - 3) * be
    d2 = (mu + al1 - be) * (al2 + (k2 - 1) * be) + (al1 - be) * mu + k1 * be * (al2 - be + mu) - (n - 1) * a * a
    d3 = (al1 - be) * (al2 + (k2 - 1) * be) * mu + k1 * (al2 - be) * be * mu - a * a * (
        k1 * (al2 - be) + k2 * (al1 - be)
    )
    return d1, d2, d3


def spectrum_factorization(params: FormParams) -> SpectrumFactorization:
    if isinstance(params, SimpleFormParams):
        return _simple_factorization(params.mu, params.alpha, params.beta, params.a, params.n)
    if params.degenerate:
        simple = params.as_simple()
        inner = _simple_factorization(simple.mu, simple.alpha, simple.beta, simple.a, simple.n)
        empty = params.alpha1 - params.beta if params.k1 == 0 else params.alpha2 - params.beta
        # keep both block factors visible; the empty block contributes nothing
        if params.k1 == 0:
            linear = ((empty, 0),) + inner.linear_factors
        else:
            linear = inner.linear_factors + ((empty, 0),)
        return SpectrumFactorization(linear, inner.tail_coeffs)
    d1, d2, d3 = _structured_coeffs(params)
    return SpectrumFactorization(
        linear_factors=(
            (params.alpha1 - params.beta, params.k1 - 1),
            (params.alpha2 - params.beta, params.k2 - 1),
        ),
        tail_coeffs=(d1, d2, d3),
    )


def lemma31_nonneg(e1, e2, e3) -> bool:
    """True iff the three roots with these elementary symmetric values are all >= 0."""
    return e1 >= 0 and e2 >= 0 and e3 >= 0


# --------------------------------------------------------------------------
# certification

@dataclass(frozen=True)
class ConditionVerdict:
    per_condition: dict[str, bool]
    values: dict[str, object]
    certified: bool
    tolerance: float


def _scale(params: FormParams) -> float:
    if isinstance(params, SimpleFormParams):
        vals = (params.mu, params.alpha, params.beta, params.a)
    else:
        vals = (params.mu, params.alpha1, params.alpha2, params.beta, params.a)
    return max(1.0, max(abs(float(v)) for v in vals))


def _condition_values(params: FormParams) -> dict[str, tuple[object, str, int]]:
    """label -> (value, relation, polynomial degree); relation in {'>=', '>', '=='}."""
    if isinstance(params, StructuredFormParams) and params.degenerate:
        params = params.as_simple()
    if isinstance(params, SimpleFormParams):
        mu, al, be, a, n = params.mu, params.alpha, params.beta, params.a, params.n
        a3 = mu * al + (n - 2) * mu * be - (n - 1) * a * a
        return {
            "A1'": (al - be, ">=", 1),
            "A2'": (mu + al + (n - 2) * be, ">=", 1),
            "A3'": (a3, ">=", 2),
            "A4'": (mu + (n - 1) * al, ">", 1),
            "A5'": ((al - be) * a3, "==", 3),
        }
    mu, al1, al2, be, a, k1, k2 = (params.mu, params.alpha1, params.alpha2, params.beta,
                                   params.a, params.k1, params.k2)
    n = params.n
    d1, d2, d3 = _structured_coeffs(params)
    return {
        "A1": (min(al1 - be, al2 - be), ">=", 1),
        "A2": (d1, ">=", 1),
        "A3": (d2, ">=", 2),
        "A4": (d3, ">=", 3),
        "A5": (mu + k1 * al1 + k2 * al2, ">", 1),
        "A6": ((al1 - be) * (al2 - be) * d3, "==", 5),
    }


def _passes(value, relation: str, slack: float, exact: bool) -> bool:
    if exact:
        slack = 0
    if relation == ">=":
        return value >= -slack
    if relation == ">":
        return value > slack
    return abs(value) <= slack


def check_conditions(params: FormParams, tol: float = DEFAULT_TOL) -> ConditionVerdict:
    """Evaluate A1-A6 (structured) or A1'-A5' (simple).

    Floating-point slack for a condition of polynomial degree d is
    ``tol * scale**d`` with scale the largest parameter magnitude (>= 1).
    In exact mode every comparison is exact.
    """
    if tol < 0:
        raise ValueError("tol must be non-negative")
    exact = params.exact
    scale = _scale(params)
    per, values = {}, {}
    for label, (value, rel, deg) in _condition_values(params).items():
        per[label] = _passes(value, rel, tol * scale ** deg, exact)
        values[label] = value
    return ConditionVerdict(per, values, all(per.values()), 0.0 if exact else tol)


@dataclass(frozen=True)
class PSDCertificate:
    certified: bool
    verdict: ConditionVerdict
    spectrum: SpectrumFactorization

    @property
    def status(self) -> str:
        return "certified_psd_with_kernel" if self.certified else "undetermined"


def certify_psd(params: FormParams, tol: float = DEFAULT_TOL) -> PSDCertificate:
    verdict = check_conditions(params, tol)
    return PSDCertificate(verdict.certified, verdict, spectrum_factorization(params))


# --------------------------------------------------------------------------
# equality kernel

@dataclass(frozen=True)
class KernelDescription:
    case_label: str
    kernel_basis: tuple[tuple, ...]
    kernel_dim: int


def _rational_nullspace(rows: list[list[Fraction]]) -> list[list[Fraction]]:
    """Basis of {y : rows @ y = 0} by exact Gauss-Jordan elimination."""
    m = [list(r) for r in rows]
    ncols = len(m[0]) if m else 0
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        pv = m[r][c]
        m[r] = [v / pv for v in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [vi - f * vr for vi, vr in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    basis = []
    for free in (c for c in range(ncols) if c not in pivots):
        y = [Fraction(0)] * ncols
        y[free] = Fraction(1)
        for row, pc in enumerate(pivots):
            y[pc] = -m[row][free]
        basis.append(y)
    return basis


def _case_label(params: FormParams, tol: float) -> str:
    exact = params.exact
    scale = _scale(params)

    def is_zero(v, deg):
        return v == 0 if exact else abs(v) <= tol * scale ** deg

    if isinstance(params, SimpleFormParams):
        if not is_zero(params.alpha - params.beta, 1):
            return "B1'"
        if is_zero(params.mu * params.alpha - params.a ** 2, 2):
            return "B3'"
        return "B2'"
    p = params.alpha1 - params.beta
    q = params.alpha2 - params.beta
    mixed_zero = is_zero(params.mu * params.beta - params.a ** 2, 2)
    if not is_zero(p, 1) and not is_zero(q, 1):
        return "B1"
    if not is_zero(p, 1):
        return "B2" if mixed_zero else "B3"
    return "B4" if mixed_zero else "B5"


def equality_kernel(params: FormParams, tol: float = DEFAULT_TOL) -> KernelDescription:
    """Explicit basis of {x : C x = 0} for a certified form, with its case label.

    The kernel splits into zero-sum vectors inside a block whose
    ``alpha - beta`` vanishes, plus the kernel of C restricted to
    span{e1, 1_block1, 1_block2}, where C acts by a small reduced matrix.
    """
    if not check_conditions(params, tol).certified:
        raise PreconditionError("equality_kernel requires certified parameters; use the eigensolver oracle")
    if isinstance(params, StructuredFormParams) and params.degenerate:
        layout = params.as_simple()
    else:
        layout = params
    label = _case_label(layout, tol)
    exact = params.exact
    scale = _scale(params)
    n = params.n

    blocks = _blocks(layout)
    sizes = [stop - start for start, stop, _ in blocks]
    beta = layout.beta
    # reduced matrix on coefficients (x1, t_1, ..., t_m): x = x1 e1 + sum t_b 1_b
    reduced = [[layout.mu] + [layout.a * k for k in sizes]]
    for b, (_, _, alpha) in enumerate(blocks):
        row = [layout.a]
        for c, k in enumerate(sizes):
            row.append(k * beta + (alpha - beta if b == c else 0))
        reduced.append(row)

    basis: list[tuple] = []
    zero = Fraction(0) if exact else 0.0
    one = Fraction(1) if exact else 1.0
    for (start, stop, alpha), k in zip(blocks, sizes):
        gap = alpha - beta
        if (gap == 0) if exact else abs(gap) <= tol * scale:
            for j in range(start + 1, stop):
                v = [zero] * n
                v[start] = one
                v[j] = -one
                basis.append(tuple(v))

    def embed(coeffs):
        v = [coeffs[0]] + [zero] * (n - 1)
        for (start, stop, _), t in zip(blocks, coeffs[1:]):
            for i in range(start, stop):
                v[i] = t
        return tuple(v)

    if exact:
        for y in _rational_nullspace([[Fraction(v) for v in row] for row in reduced]):
            basis.append(embed(y))
    else:
        # symmetric version in the orthonormal basis (e1, 1_b / sqrt(k_b))
        d = np.sqrt(np.array([1.0] + [float(k) for k in sizes]))
        R = np.array(reduced, dtype=float)
        S = R * d[:, None] / d[None, :]
        S = 0.5 * (S + S.T)
        w, V = np.linalg.eigh(S)
        cnorm = float(np.linalg.norm(build_matrix(params)))
        for lam, vec in zip(w, V.T):
            if abs(lam) <= tol * max(cnorm, 1.0):
                basis.append(embed(list(vec / d)))
    return KernelDescription(label, tuple(basis), len(basis))


# --------------------------------------------------------------------------
# named examples

EXAMPLES = ("cauchy_schwarz", "deng_2_2", "deng_3_3", "oprea_4_14", "oprea_4_27")
_MIN_N = {"cauchy_schwarz": 2, "deng_2_2": 2, "deng_3_3": 2, "oprea_4_14": 3, "oprea_4_27": 3}


@dataclass(frozen=True)
class NamedExample:
    name: str
    n: int
    params: FormParams
    # y[i] = x[permutation[i]] (0-based); identity except for oprea_4_27
    permutation: tuple[int, ...]
    # vectors (in the example's own y coordinates) spanning the stated equality set
    equality_vectors: tuple[tuple[Fraction, ...], ...] = field(default=())
    r: int | None = None

    def to_x(self, y: Sequence) -> list:
        """Map example coordinates y to form coordinates x."""
        x = [None] * self.n
        for i, j in enumerate(self.permutation):
            x[j] = y[i]
        return x

    def classical_gap(self, y: Sequence) -> float:
        return classical_gap(self.name, y, self.r)


def named_example(name: str, n: int, r: int | None = None) -> NamedExample:
    if name not in _MIN_N:
        raise InvalidParams(f"unknown example {name!r}; expected one of {', '.join(EXAMPLES)}")
    if isinstance(n, bool) or not isinstance(n, int) or n < _MIN_N[name]:
        raise InvalidParams(f"{name} needs n >= {_MIN_N[name]}, got {n!r}")
    F = Fraction
    ident = tuple(range(n))
    one, zero = F(1), F(0)
    if name == "cauchy_schwarz":
        p = SimpleFormParams(1 - F(1, n), 1 - F(1, n), -F(1, n), -F(1, n), n)
        eq = ((one,) * n,)
    elif name == "deng_2_2":
        p = SimpleFormParams(F(n - 1, 4 * n), F(5 * n - 1, 4 * n), F(n - 1, 4 * n), -F(n + 1, 4 * n), n)
        eq = ((F(n + 1),) + (one,) * (n - 1),)
    elif name == "deng_3_3":
        p = SimpleFormParams(F(9, 8), F(1, 8), F(1, 8), -F(3, 8), n)
        vecs = [(one, F(3)) + (zero,) * (n - 2)]
        for j in range(2, n):
            v = [zero] * n
            v[1], v[j] = one, -one
            vecs.append(tuple(v))
        eq = tuple(vecs)
    elif name == "oprea_4_14":
        p = SimpleFormParams(
            F((n - 2) * (n - 1), 2 * (n + 1)),
            F((3 * n + 1) * (n - 2), 2 * (n + 1)),
            -F(3 * (n - 1), 2 * (n + 1)),
            -F(n - 2, n + 1),
            n,
        )
        eq = ((F(2),) + (one,) * (n - 1),)
    else:
        if r is None:
            r = 2
        if isinstance(r, bool) or not isinstance(r, int) or not 2 <= r <= n:
            raise InvalidParams(f"oprea_4_27 needs 2 <= r <= n, got r={r!r}")
        d = 3 * n + 5
        p = StructuredFormParams(
            F(9 * (n - 2) * (n + 1), 2 * d),
            F((3 * n - 1) * (n - 2), 2 * d),
            F(9 * n * n - 3 * n - 8, 2 * d),
            -F(9 * n - 7, 2 * d),
            -F(3 * (n - 2), d),
            1,
            n - 2,
        )
        perm = list(ident)
        perm[1], perm[r - 1] = perm[r - 1], perm[1]
        y = [F(3, 2)] * n
        y[0] = one
        y[r - 1] = F(9, 2)
        return NamedExample(name, n, p, tuple(perm), (tuple(y),), r)
    return NamedExample(name, n, p, ident, eq, None)


def classical_gap(name: str, y: Sequence, r: int | None = None):
    """RHS - LHS of the classical inequality behind each named example.

    Evaluated directly from the textbook statement, not from the form.
    """
    y = list(y)
    n = len(y)
    s = sum(y)
    sq = sum(v * v for v in y)
    x1 = y[0]
    rest = y[1:]
    rs = sum(rest)
    rsq = sum(v * v for v in rest)
    pairs_rest = (rs * rs - rsq) / 2
    if name == "cauchy_schwarz":
        return sq - s * s / n
    if name == "deng_2_2":
        return Fraction(n - 1, 4 * n) * s * s - (x1 * rs - rsq)
    if name == "deng_3_3":
        return Fraction(1, 8) * s * s - (x1 * rs - x1 * x1)
    if name == "oprea_4_14":
        lhs = -(n - 2) * rsq + (n - 2) * x1 * rs + (n - 1) * pairs_rest
        return Fraction((n - 2) * (n - 1), 2 * (n + 1)) * s * s - lhs
    if name == "oprea_4_27":
        r = 2 if r is None else r
        others = sum(y[i] * y[i] for i in range(1, n) if i != r - 1)
        lhs = -(n - 2) * x1 * x1 - (n - 1) * others + (n - 2) * x1 * rs + (n - 1) * pairs_rest
        return Fraction((3 * n - 1) * (n - 2), 2 * (3 * n + 5)) * s * s - lhs
    raise InvalidParams(f"unknown example {name!r}")


def to_float(params: FormParams) -> FormParams:
    """Same parameters in floating point."""
    if isinstance(params, SimpleFormParams):
        return SimpleFormParams(float(params.mu), float(params.alpha), float(params.beta), float(params.a), params.n)
    return StructuredFormParams(float(params.mu), float(params.alpha1), float(params.alpha2),
                                float(params.beta), float(params.a), params.k1, params.k2)


def oracle_spectrum(params: FormParams) -> np.ndarray:
    from .numerics import symmetric_eigen

    return symmetric_eigen(np.asarray(build_matrix(params), dtype=float)).eigenvalues

