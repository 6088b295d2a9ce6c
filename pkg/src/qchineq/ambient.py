"""Pointwise model of a Kaehler QCH ambient tangent space.

The tangent space is R^{2n} with the standard inner product.  The first n
coordinates span the Lagrangian tangent space; J sends coordinate i to n+i
and n+i to -i.  The curvature tensor is R = a*pi + b*Phi + c*Psi.

Vectors are numpy arrays of length 2n.  All tensors are evaluated literally
from their defining expressions; nothing here knows about the closed-form
frame sums, which is what makes this module usable as an oracle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

UNIT_TOL = 1e-12


class InvalidPoint(ValueError):
    pass


def complex_structure(v: np.ndarray) -> np.ndarray:
    n = v.shape[-1] // 2
    return np.concatenate([-v[..., n:], v[..., :n]], axis=-1)


def j_matrix(n: int) -> np.ndarray:
    J = np.zeros((2 * n, 2 * n))
    J[n:, :n] = np.eye(n)
    J[:n, n:] = -np.eye(n)
    return J


@dataclass(frozen=True, eq=False)
class AmbientPoint:
    n: int
    xi: np.ndarray
    abc: tuple[float, float, float]

    def __post_init__(self):
        if isinstance(self.n, bool) or not isinstance(self.n, (int, np.integer)) or self.n < 2:
            raise InvalidPoint(f"n must be an integer >= 2, got {self.n!r}")
        xi = np.asarray(self.xi, dtype=float)
        if xi.shape != (2 * self.n,):
            raise InvalidPoint(f"xi must have length {2 * self.n}, got shape {xi.shape}")
        if abs(np.linalg.norm(xi) - 1.0) > UNIT_TOL:
            raise InvalidPoint(f"xi must be a unit vector (|xi| = {np.linalg.norm(xi)!r})")
        if len(self.abc) != 3:
            raise InvalidPoint("abc must hold three coefficients (a, b, c)")
        xi.setflags(write=False)
        object.__setattr__(self, "xi", xi)
        object.__setattr__(self, "abc", tuple(float(v) for v in self.abc))

    @property
    def jxi(self) -> np.ndarray:
        return complex_structure(self.xi)

    def eta(self, v) -> float:
        return float(np.dot(self.xi, v))

    def eta_tilde(self, v) -> float:
        return float(np.dot(self.jxi, v))

    def tangential_parts(self) -> tuple[np.ndarray, np.ndarray]:
        """(eta^T, eta_tilde^T) as n-vectors in the Lagrangian frame e_1..e_n.

        With xi = (u, v): eta(e_i) = u_i and eta_tilde(e_i) = <J xi, e_i> = -v_i.
        """
        return self.xi[: self.n].copy(), -self.xi[self.n:].copy()


def _check(p: AmbientPoint, *vecs) -> list[np.ndarray]:
    out = []
    for v in vecs:
        v = np.asarray(v, dtype=float)
        if v.shape != (2 * p.n,):
            raise InvalidPoint(f"expected a vector of length {2 * p.n}, got shape {v.shape}")
        out.append(v)
    return out


def pi_tensor(p: AmbientPoint, X, Y, Z, U) -> float:
    X, Y, Z, U = _check(p, X, Y, Z, U)
    g = np.dot
    JX, JY, JZ = complex_structure(X), complex_structure(Y), complex_structure(Z)
    four_pi = (
        g(Y, Z) * g(X, U)
        - g(X, Z) * g(Y, U)
        + g(JY, Z) * g(JX, U)
        - g(JX, Z) * g(JY, U)
        - 2.0 * g(JX, Y) * g(JZ, U)
    )
    return float(four_pi) / 4.0


def phi_tensor(p: AmbientPoint, X, Y, Z, U) -> float:
    X, Y, Z, U = _check(p, X, Y, Z, U)
    g = np.dot
    e, t = p.eta, p.eta_tilde
    JX, JY, JZ = complex_structure(X), complex_structure(Y), complex_structure(Z)

    def sym(A, B):
        return e(A) * e(B) + t(A) * t(B)

    def alt(A, B):
        return e(A) * t(B) - e(B) * t(A)

    eight_phi = (
        g(Y, Z) * sym(X, U)
        - g(X, Z) * sym(Y, U)
        + g(X, U) * sym(Y, Z)
        - g(Y, U) * sym(X, Z)
        + g(JY, Z) * alt(X, U)
        - g(JX, Z) * alt(Y, U)
        + g(JX, U) * alt(Y, Z)
        - g(JY, U) * alt(X, Z)
        - 2.0 * g(JX, Y) * alt(Z, U)
        - 2.0 * g(JZ, U) * alt(X, Y)
    )
    return float(eight_phi) / 8.0


def psi_tensor(p: AmbientPoint, X, Y, Z, U) -> float:
    X, Y, Z, U = _check(p, X, Y, Z, U)
    e, t = p.eta, p.eta_tilde
    return float(
        e(Y) * e(Z) * t(X) * t(U)
        - e(X) * e(Z) * t(Y) * t(U)
        + e(X) * e(U) * t(Y) * t(Z)
        - e(Y) * e(U) * t(X) * t(Z)
    )


def qch_curvature(p: AmbientPoint, X, Y, Z, U) -> float:
    a, b, c = p.abc
    return a * pi_tensor(p, X, Y, Z, U) + b * phi_tensor(p, X, Y, Z, U) + c * psi_tensor(p, X, Y, Z, U)


def holomorphic_sectional_angle(p: AmbientPoint, X, unit_tol: float = 1e-10) -> tuple[float, float]:
    """(R(X, JX, JX, X), cos^2 of the angle between span{X, JX} and span{xi, J xi})."""
    (X,) = _check(p, X)
    if abs(np.linalg.norm(X) - 1.0) > unit_tol:
        raise InvalidPoint("X must be a unit vector")
    JX = complex_structure(X)
    return qch_curvature(p, X, JX, JX, X), p.eta(X) ** 2 + p.eta_tilde(X) ** 2


def tangent_vector(p: AmbientPoint, x) -> np.ndarray:
    """Embed an n-vector of the Lagrangian tangent space into R^{2n}."""
    x = np.asarray(x, dtype=float)
    return np.concatenate([x, np.zeros(p.n)])


# --------------------------------------------------------------------------
# frame sums over a tangent orthonormal frame

SUM_NAMES = ("pi_ric", "phi_ric", "psi_ric", "pi_scal", "phi_scal", "psi_scal")


def closed_form_sums(p: AmbientPoint, X) -> dict[str, float]:
    """Closed forms of the pi/Phi/Psi frame sums entering Ric(X) and tau.

    The ``*_ric`` entries are sums of T(X, e_i, e_i, X) over a tangent frame
    containing X; the ``*_scal`` entries sum T(e_i, e_j, e_j, e_i) over i < j.
    Both are frame independent.
    """
    n = p.n
    X = np.asarray(X, dtype=float)
    u, w = p.tangential_parts()
    ex, et = float(u @ X), float(w @ X)
    return {
        "pi_ric": (n - 1) / 4.0,
        "phi_ric": ((n - 2) * (ex * ex + et * et) + 1.0) / 8.0,
        "psi_ric": float(np.sum((ex * w - et * u) ** 2)),
        "pi_scal": (n - 1) * n / 8.0,
        "phi_scal": (n - 1) / 8.0,
        "psi_scal": float((u @ u) * (w @ w) - (u @ w) ** 2),
    }


def brute_force_sums(p: AmbientPoint, frame) -> dict[str, float]:
    """The same sums evaluated term by term from the tensor definitions.

    ``frame`` is an orthogonal n x n matrix whose columns are the tangent
    frame; its first column plays the role of X.
    """
    n = p.n
    frame = np.asarray(frame, dtype=float)
    e = [tangent_vector(p, frame[:, i]) for i in range(n)]
    out = {}
    for name, T in (("pi", pi_tensor), ("phi", phi_tensor), ("psi", psi_tensor)):
        out[f"{name}_ric"] = sum(T(p, e[0], e[i], e[i], e[0]) for i in range(1, n))
        out[f"{name}_scal"] = sum(
            T(p, e[i], e[j], e[j], e[i]) for i in range(n) for j in range(i + 1, n)
        )
    return {k: float(out[k]) for k in SUM_NAMES}


def vector_at_angle(p: AmbientPoint, cos_sq: float, rng: np.random.Generator) -> np.ndarray:
    """A random unit X with eta(X)^2 + eta_tilde(X)^2 = cos_sq.

    X mixes a unit vector of span{xi, J xi} with one from its orthogonal
    complement, which is J-invariant, so the angle is exactly as requested.
    """
    if not 0.0 <= cos_sq <= 1.0:
        raise ValueError("cos_sq must lie in [0, 1]")
    xi, jxi = p.xi, p.jxi
    phi = rng.uniform(0.0, 2.0 * np.pi)
    inside = np.cos(phi) * xi + np.sin(phi) * jxi
    W = rng.standard_normal(2 * p.n)
    W -= (W @ xi) * xi + (W @ jxi) * jxi
    W /= np.linalg.norm(W)
    return np.sqrt(cos_sq) * inside + np.sqrt(1.0 - cos_sq) * W
