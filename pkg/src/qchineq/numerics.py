"""Brute-force numerical oracles.

Everything here is deliberately self-contained (no LAPACK) so that the
closed forms elsewhere in the package are checked against an independent
code path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

SWEEP_BUDGET = 100
OFFDIAG_THRESHOLD = 1e-14


class ConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class EigenDecomposition:
    eigenvalues: np.ndarray  # ascending
    eigenvectors: np.ndarray  # columns

    @property
    def min(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def max(self) -> float:
        return float(self.eigenvalues[-1])


def _offdiag_norm(a: np.ndarray) -> float:
    off = a - np.diag(np.diag(a))
    return float(np.sqrt(np.sum(off * off)))


def symmetric_eigen(A, sym_tol: float = 1e-12) -> EigenDecomposition:
    """Full spectrum of a small symmetric matrix by cyclic Jacobi rotations."""
    a = np.array(A, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    n = a.shape[0]
    norm = float(np.linalg.norm(a)) if n else 0.0
    if n and np.max(np.abs(a - a.T)) > sym_tol * max(norm, 1.0):
        raise ValueError("matrix is not symmetric")
    a = 0.5 * (a + a.T)
    v = np.eye(n)
    if n <= 1 or norm == 0.0:
        return EigenDecomposition(np.diag(a).copy(), v)

    target = OFFDIAG_THRESHOLD * norm
    for _ in range(SWEEP_BUDGET):
        if _offdiag_norm(a) <= target:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                # Rutishauser's stable rotation
                diff = a[q, q] - a[p, p]
                if abs(apq) < 1e-150 * abs(diff):
                    t = apq / diff  # theta would overflow; t ~ 1 / (2 theta)
                else:
                    theta = diff / (2.0 * apq)
                    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                ap = a[:, p].copy()
                aq = a[:, q].copy()
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                ap = a[p, :].copy()
                aq = a[q, :].copy()
                a[p, :] = c * ap - s * aq
                a[q, :] = s * ap + c * aq
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    else:
        if _offdiag_norm(a) > target:
            raise ConvergenceError(
                f"Jacobi did not converge in {SWEEP_BUDGET} sweeps "
                f"(off-diagonal norm {_offdiag_norm(a):.3e})"
            )

    w = np.diag(a).copy()
    order = np.argsort(w, kind="stable")
    return EigenDecomposition(w[order], v[:, order])


def min_on_sphere(A, restarts: int = 8, seed: int = 0, iters: int = 20000) -> tuple[float, np.ndarray]:
    """Minimise x^T A x over the unit sphere from random starts.

    Uses shifted power iteration, i.e. power iteration on (sigma I - A)
    where sigma bounds the spectrum from above. No eigensolver involved.
    """
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    a = np.asarray(A, dtype=float)
    a = 0.5 * (a + a.T)
    n = a.shape[0]
    rng = np.random.default_rng(seed)
    sigma = float(np.max(np.sum(np.abs(a), axis=1))) + 1.0  # Gershgorin
    shifted = sigma * np.eye(n) - a
    best_val, best_x = math.inf, None
    for _ in range(restarts):
        x = rng.standard_normal(n)
        x /= np.linalg.norm(x)
        prev = x @ a @ x
        for _ in range(iters):
            y = shifted @ x
            x = y / np.linalg.norm(y)
            val = x @ a @ x
            if abs(val - prev) <= 1e-15 * sigma:
                break
            prev = val
        val = float(x @ a @ x)
        if val < best_val:
            best_val, best_x = val, x
    return best_val, best_x


def spectra_match(s1, s2, tol: float) -> bool:
    """Sorted elementwise comparison with tolerance relative to the spectrum scale."""
    a = np.sort(np.asarray(s1, dtype=float))
    b = np.sort(np.asarray(s2, dtype=float))
    if a.shape != b.shape:
        raise ValueError(f"spectrum length mismatch: {a.size} vs {b.size}")
    if a.size == 0:
        return True
    scale = 1.0 + max(float(np.max(np.abs(a))), float(np.max(np.abs(b))))
    return bool(np.all(np.abs(a - b) <= tol * scale))
