"""Hermitian linear algebra helpers used across the package.

All covariance matrices in this codebase are Hermitian PSD by
construction, but floating point and rank-deficient correlation models
(dense RIS spacings) require a tolerant square root and guarded solves.
"""
from __future__ import annotations

import numpy as np
from scipy.linalg import cho_factor, cho_solve, eigh

from .errors import IllConditionedError

# Condition number above which LMMSE solves are flagged as unreliable.
COND_LIMIT = 1e12


def hermitize(a: np.ndarray) -> np.ndarray:
    """Return the Hermitian part (A + A^H)/2."""
    return 0.5 * (a + a.conj().T)


def herm_sqrt(a: np.ndarray, clip_tol: float = 1e-10) -> np.ndarray:
    """Hermitian PSD square root via eigendecomposition.

    Eigenvalues below ``clip_tol * lambda_max`` in magnitude are clamped
    to zero; sinc-type RIS correlation matrices are rank deficient for
    dense element spacings, so small negative eigenvalues are expected.
    """
    w, v = eigh(hermitize(a))
    lam_max = float(w[-1]) if w.size else 0.0
    if lam_max <= 0.0:
        return np.zeros_like(np.asarray(a, dtype=complex))
    w = np.where(w > clip_tol * lam_max, w, 0.0)
    return (v * np.sqrt(w)) @ v.conj().T


def trace_prod(a: np.ndarray, b: np.ndarray) -> complex:
    """tr(A @ B) without forming the product."""
    return np.sum(a * b.T)


def herm_trace_prod(a: np.ndarray, b: np.ndarray) -> float:
    """tr(A @ B) for Hermitian A, B; the result is real."""
    return float(np.real(np.sum(a * b.T)))


class HermitianSolver:
    """Cached Cholesky factorization of a Hermitian positive definite matrix.

    Falls back to an eigenvalue-based report when the matrix is not
    numerically positive definite.
    """

    def __init__(self, a: np.ndarray, name: str = "matrix"):
        a = np.asarray(a)
        self.name = name
        self.shape = a.shape
        try:
            self._factor = cho_factor(a, lower=True)
        except np.linalg.LinAlgError as exc:
            w = eigh(hermitize(a), eigvals_only=True)
            cond = float(np.inf if w[0] <= 0 else w[-1] / w[0])
            raise IllConditionedError(
                f"{name} is not positive definite (condition number ~{cond:.3e})",
                cond=cond,
            ) from exc
        d = np.abs(np.diag(self._factor[0]))
        # Condition estimate from the Cholesky diagonal: cheap and adequate
        # for the 1e12 red line used here.
        self.cond_estimate = float((d.max() / d.min()) ** 2) if d.min() > 0 else np.inf

    @property
    def is_well_conditioned(self) -> bool:
        return self.cond_estimate <= COND_LIMIT

    def solve(self, b: np.ndarray) -> np.ndarray:
        return cho_solve(self._factor, b)


def max_asymmetry(a: np.ndarray) -> float:
    """Largest entrywise deviation from Hermitian symmetry."""
    return float(np.max(np.abs(a - a.conj().T))) if a.size else 0.0


def min_relative_eigenvalue(a: np.ndarray) -> float:
    """Smallest eigenvalue of the Hermitian part relative to the spectral norm."""
    w = eigh(hermitize(a), eigvals_only=True)
    scale = max(abs(float(w[0])), abs(float(w[-1])), 1.0e-300)
    return float(w[0]) / scale
