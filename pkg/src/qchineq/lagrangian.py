"""Pointwise curvature of a Lagrangian submanifold in a Kaehler QCH space.

A point is described by the fully symmetric cubic form h[r, i, j] =
<h(e_i, e_j), J e_r> together with the ambient data.  Ricci curvature is a
quadratic form in the unit direction X, so it is exposed as a symmetric
matrix (``ricci_operator``); the same holds for both sides of every
inequality, which turns "for all unit X" statements into eigenvalue tests.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .ambient import AmbientPoint, InvalidPoint

SYMMETRY_TOL = 1e-12
UNIT_TOL = 1e-10

_PERMS = [p for p in itertools.permutations(range(3)) if p != (0, 1, 2)]


class UnsupportedDimension(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class SecondFundamentalForm:
    n: int
    coeffs: np.ndarray

    def __post_init__(self):
        h = np.asarray(self.coeffs, dtype=float)
        if h.shape != (self.n,) * 3:
            raise InvalidPoint(f"h must have shape {(self.n,) * 3}, got {h.shape}")
        bound = SYMMETRY_TOL * max(1.0, float(np.max(np.abs(h))) if h.size else 0.0)
        for perm in _PERMS:
            err = np.abs(h - h.transpose(perm))
            if np.max(err) > bound:
                r, i, j = np.unravel_index(int(np.argmax(err)), err.shape)
                raise InvalidPoint(
                    f"h is not fully symmetric: h[{r}][{i}][{j}] differs from its "
                    f"permutation {perm} by {float(np.max(err)):.3e}"
                )
        h.setflags(write=False)
        object.__setattr__(self, "coeffs", h)

    def rotate(self, Q: np.ndarray) -> "SecondFundamentalForm":
        """Coefficients in the frame whose vectors are the columns of Q."""
        h = np.einsum("ar,bi,cj,abc->rij", Q, Q, Q, self.coeffs)
        return SecondFundamentalForm(self.n, _symmetrize(h))


def _symmetrize(h: np.ndarray) -> np.ndarray:
    return sum(h.transpose(p) for p in itertools.permutations(range(3))) / 6.0


@dataclass(frozen=True, eq=False)
class LagrangianPoint:
    h: SecondFundamentalForm
    ambient: AmbientPoint

    def __post_init__(self):
        if self.h.n != self.ambient.n:
            raise InvalidPoint(f"dimension mismatch: h has n={self.h.n}, ambient has n={self.ambient.n}")

    @property
    def n(self) -> int:
        return self.h.n

    @property
    def abc(self) -> tuple[float, float, float]:
        return self.ambient.abc

    def eta_parts(self) -> tuple[np.ndarray, np.ndarray]:
        return self.ambient.tangential_parts()

    def rotate(self, Q: np.ndarray) -> "LagrangianPoint":
        """Same point expressed in the tangent frame given by the columns of Q.

        The ambient frame {e_i, J e_i} is rotated by the unitary diag(Q, Q),
        so xi's coordinates transform accordingly.
        """
        n = self.n
        u, v = self.ambient.xi[:n], self.ambient.xi[n:]
        xi = np.concatenate([Q.T @ u, Q.T @ v])
        xi = xi / np.linalg.norm(xi)
        return LagrangianPoint(self.h.rotate(Q), AmbientPoint(n, xi, self.abc))


def make_point(h, xi, abc) -> LagrangianPoint:
    h = np.asarray(h, dtype=float)
    n = h.shape[0]
    return LagrangianPoint(SecondFundamentalForm(n, h), AmbientPoint(n, np.asarray(xi, dtype=float), tuple(abc)))


def scale(p: LagrangianPoint) -> float:
    """Magnitude used to make fuzz tolerances relative."""
    a, b, c = p.abc
    return 1.0 + abs(a) + abs(b) + abs(c) + float(np.sum(p.h.coeffs ** 2))


def _unit(p: LagrangianPoint, X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.shape != (p.n,):
        raise InvalidPoint(f"X must have length {p.n}, got shape {X.shape}")
    if abs(np.linalg.norm(X) - 1.0) > UNIT_TOL:
        raise InvalidPoint(f"X must be a unit vector (|X| = {np.linalg.norm(X)!r})")
    return X


# --------------------------------------------------------------------------
# ambient contributions (closed forms)

def _mixing_operator(u: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Matrix of X -> |eta(X) w - eta_tilde(X) u|^2."""
    return (w @ w) * np.outer(u, u) + (u @ u) * np.outer(w, w) - (u @ w) * (np.outer(u, w) + np.outer(w, u))


def ambient_ricci_operator(p: LagrangianPoint) -> np.ndarray:
    """Matrix of X -> sum_i Rbar(X, e_i, e_i, X) over the tangent frame."""
    n = p.n
    a, b, c = p.abc
    u, w = p.eta_parts()
    return (
        ((n - 1) * a / 4.0 + b / 8.0) * np.eye(n)
        + (n - 2) * b / 8.0 * (np.outer(u, u) + np.outer(w, w))
        + c * _mixing_operator(u, w)
    )


def ambient_scalar(p: LagrangianPoint) -> float:
    n = p.n
    a, b, c = p.abc
    u, w = p.eta_parts()
    return (n - 1) * n / 8.0 * a + (n - 1) / 8.0 * b + ((u @ u) * (w @ w) - (u @ w) ** 2) * c


# --------------------------------------------------------------------------
# intrinsic curvature

def ricci_operator(p: LagrangianPoint) -> np.ndarray:
    """Symmetric S with Ric(X) = X^T S X for unit X (Gauss equation)."""
    h = p.h.coeffs
    traces = np.einsum("rii->r", h)
    extrinsic = np.einsum("r,rij->ij", traces, h) - np.einsum("rik,rkj->ij", h, h)
    S = ambient_ricci_operator(p) + extrinsic
    return 0.5 * (S + S.T)


def ricci(p: LagrangianPoint, X) -> float:
    X = _unit(p, X)
    return float(X @ ricci_operator(p) @ X)


def scalar_curvature(p: LagrangianPoint) -> float:
    h = p.h.coeffs
    diag = np.einsum("rii->ri", h)
    # sum_r sum_{i<j} h_ii h_jj - h_ij^2 = 1/2 sum_r [(tr h^r)^2 - |h^r|^2]
    extrinsic = 0.5 * (float(np.sum(diag.sum(axis=1) ** 2)) - float(np.sum(h * h)))
    return ambient_scalar(p) + extrinsic


def mean_curvature_sq(p: LagrangianPoint) -> float:
    traces = np.einsum("rii->r", p.h.coeffs)
    return float(traces @ traces) / p.n ** 2


@dataclass(frozen=True, eq=False)
class CurvatureSummary:
    ricci_operator: np.ndarray
    scalar: float
    mean_sq: float
    min_ricci: float
    argmin_X: np.ndarray


def curvature_summary(p: LagrangianPoint) -> CurvatureSummary:
    S = ricci_operator(p)
    w, V = np.linalg.eigh(S)
    return CurvatureSummary(S, scalar_curvature(p), mean_curvature_sq(p), float(w[0]), V[:, 0])


# --------------------------------------------------------------------------
# inequalities

def chen_ricci_bound(p: LagrangianPoint, X) -> float:
    """Upper bound for Ric(X) in terms of ambient data and |H|^2."""
    X = _unit(p, X)
    n = p.n
    a, b, c = p.abc
    u, w = p.eta_parts()
    ex, et = float(u @ X), float(w @ X)
    mix = float(np.sum((ex * w - et * u) ** 2))
    return (
        (n - 1) / 4.0 * a
        + ((n - 2) * (ex * ex + et * et) + 1.0) * b / 8.0
        + mix * c
        + (n - 1) * n / 4.0 * mean_curvature_sq(p)
    )


def chen_ricci_operator(p: LagrangianPoint) -> np.ndarray:
    """Matrix form of ``chen_ricci_bound`` (equal on unit vectors)."""
    n = p.n
    return ambient_ricci_operator(p) + (n - 1) * n / 4.0 * mean_curvature_sq(p) * np.eye(n)


def _require_n3(p: LagrangianPoint) -> None:
    if p.n < 3:
        raise UnsupportedDimension(f"this bound needs n >= 3, got n={p.n}")


def _lower_constants(p: LagrangianPoint) -> float:
    """The X-independent part of the lower bound."""
    n = p.n
    a, b, c = p.abc
    u, w = p.eta_parts()
    cross = (u @ u) * (w @ w) - (u @ w) ** 2
    return (
        -(n - 2) * (n - 1) * (n + 1) / 8.0 * a
        - (n - 2) * n / 8.0 * b
        - (n - 1) * cross * c
        + (n - 1) * scalar_curvature(p)
        - (3 * n - 1) * (n - 2) * n * n / (2.0 * (3 * n + 5)) * mean_curvature_sq(p)
    )


def ricci_lower_bound(p: LagrangianPoint, X) -> float:
    """Lower bound for Ric(X) in terms of ambient data, tau and |H|^2 (n >= 3)."""
    _require_n3(p)
    X = _unit(p, X)
    n = p.n
    _, b, c = p.abc
    u, w = p.eta_parts()
    ex, et = float(u @ X), float(w @ X)
    mix = float(np.sum((ex * w - et * u) ** 2))
    return _lower_constants(p) + (n - 2) / 8.0 * (ex * ex + et * et) * b + mix * c


def lower_bound_operator(p: LagrangianPoint) -> np.ndarray:
    _require_n3(p)
    n = p.n
    _, b, c = p.abc
    u, w = p.eta_parts()
    return (
        _lower_constants(p) * np.eye(n)
        + (n - 2) / 8.0 * b * (np.outer(u, u) + np.outer(w, w))
        + c * _mixing_operator(u, w)
    )


def delta_n(p: LagrangianPoint) -> float:
    """tau - min Ric / (n - 1), the minimum taken over the full tangent space."""
    _require_n3(p)
    summary = curvature_summary(p)
    return summary.scalar - summary.min_ricci / (p.n - 1)


def _delta_bound_at(p: LagrangianPoint, X: np.ndarray, c_sign: int) -> float:
    n = p.n
    a, b, c = p.abc
    u, w = p.eta_parts()
    ex, et = float(u @ X), float(w @ X)
    cross = (u @ u) * (w @ w) - (u @ w) ** 2
    mix = float(np.sum((ex * w + c_sign * et * u) ** 2))
    return (
        (n - 2) * (n + 1) / 8.0 * a
        + (n - 2) / (8.0 * (n - 1)) * (n - (ex * ex + et * et)) * b
        + (cross - mix / (n - 1)) * c
        + (3 * n - 1) * (n - 2) * n * n / (2.0 * (n - 1) * (3 * n + 5)) * mean_curvature_sq(p)
    )


def delta_n_bound(p: LagrangianPoint, x_choice: str = "argmin", c_sign: int = -1) -> float:
    """Upper bound for delta_n.

    The bound depends on a direction X.  ``x_choice="argmin"`` evaluates it at
    the minimiser of Ric (the direction realising delta_n); ``"max"`` takes
    the largest value over unit X.  ``c_sign=-1`` uses
    |eta(X) eta_tilde^T - eta_tilde(X) eta^T|^2 in the c-term, which is what
    rearranging the Ricci lower bound yields; ``c_sign=+1`` is the variant
    with a plus sign, kept only for comparison (it is not a valid bound).
    """
    _require_n3(p)
    if c_sign not in (-1, 1):
        raise ValueError("c_sign must be -1 or +1")
    if x_choice == "argmin":
        return _delta_bound_at(p, curvature_summary(p).argmin_X, c_sign)
    if x_choice == "max":
        n = p.n
        const = _delta_bound_at(p, np.eye(n)[0], c_sign)
        # bound(X) = const' + X^T B X; recover B from the quadratic pieces
        _, b, c = p.abc
        u, w = p.eta_parts()
        if c_sign == -1:
            mix = _mixing_operator(u, w)
        else:
            mix = (w @ w) * np.outer(u, u) + (u @ u) * np.outer(w, w) + (u @ w) * (np.outer(u, w) + np.outer(w, u))
        B = -(n - 2) / (8.0 * (n - 1)) * b * (np.outer(u, u) + np.outer(w, w)) - c / (n - 1) * mix
        e0 = np.eye(n)[0]
        base = const - float(e0 @ B @ e0)
        return base + float(np.linalg.eigvalsh(B)[-1])
    raise ValueError(f"unknown x_choice {x_choice!r}")


def delta_n_reduced_bound(n: int, a: float, mean_sq: float) -> float:
    """The complex-space-form (b = c = 0) form of the delta_n bound."""
    return (n - 2) * (n + 1) / 8.0 * a + (3 * n - 1) * (n - 2) * n * n / (2.0 * (n - 1) * (3 * n + 5)) * mean_sq


# --------------------------------------------------------------------------
# equality cases

@dataclass(frozen=True)
class PointClass:
    kind: str  # "TotallyGeodesic" | "HUmbilicalLambda3Mu" | "Generic"
    lam: Optional[float] = None
    mu: Optional[float] = None

    def __str__(self) -> str:
        if self.kind == "HUmbilicalLambda3Mu":
            return f"HUmbilicalLambda3Mu({self.lam:.12g}, {self.mu:.12g})"
        return self.kind


def classify_point(p: LagrangianPoint, tol: float = 1e-10) -> PointClass:
    h = p.h.coeffs
    if float(np.max(np.abs(h))) <= tol:
        return PointClass("TotallyGeodesic")
    if p.n != 2:
        return PointClass("Generic")
    traces = np.einsum("rii->r", h)
    norm = float(np.linalg.norm(traces))
    if norm / p.n <= tol:
        return PointClass("Generic")
    e1 = traces / norm
    Q = np.array([[e1[0], -e1[1]], [e1[1], e1[0]]])
    hr = p.h.rotate(Q).coeffs
    lam, mu = float(hr[0, 0, 0]), float(hr[0, 1, 1])
    if abs(hr[1, 0, 0]) <= tol and abs(hr[1, 1, 1]) <= tol and abs(lam - 3.0 * mu) <= tol:
        return PointClass("HUmbilicalLambda3Mu", lam, mu)
    return PointClass("Generic")


def gap_operator(p: LagrangianPoint, theorem: str = "chen_ricci") -> np.ndarray:
    """Matrix G with X^T G X = (bound side) - (other side) for unit X."""
    if theorem == "chen_ricci":
        G = chen_ricci_operator(p) - ricci_operator(p)
    elif theorem == "lower_bound":
        G = ricci_operator(p) - lower_bound_operator(p)
    else:
        raise ValueError(f"unknown theorem {theorem!r}")
    return 0.5 * (G + G.T)


def equality_gap_everywhere(p: LagrangianPoint, theorem: str = "chen_ricci") -> tuple[float, np.ndarray]:
    """Largest gap over unit X and a direction attaining it.

    Since the gap is non-negative, a max gap of (numerically) zero means the
    inequality is an equality for every unit X.
    """
    w, V = np.linalg.eigh(gap_operator(p, theorem))
    return float(w[-1]), V[:, -1]


def min_gap(p: LagrangianPoint, theorem: str = "chen_ricci") -> tuple[float, np.ndarray]:
    w, V = np.linalg.eigh(gap_operator(p, theorem))
    return float(w[0]), V[:, 0]
