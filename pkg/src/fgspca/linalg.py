"""Dense linear-algebra primitives used throughout the package.

Thin wrappers over LAPACK (through numpy) that add input validation and a
deterministic sign convention, plus the scalar soft-threshold operator.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, NotPSDError

SYMMETRY_TOL = 1e-10
PSD_CLAMP_TOL = 1e-8


@dataclass(frozen=True)
class SvdFactors:
    """Thin SVD ``m = u @ diag(singular_values) @ v.T``."""

    u: np.ndarray
    singular_values: np.ndarray
    v: np.ndarray


@dataclass(frozen=True)
class QrFactors:
    q: np.ndarray
    r: np.ndarray


def as_matrix(m, name: str = "matrix") -> np.ndarray:
    """Return ``m`` as a finite 2-D float array or raise InvalidInputError."""
    a = np.asarray(m, dtype=float)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise InvalidInputError(f"{name} must be a non-empty 2-D array, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidInputError(f"{name} contains non-finite entries")
    return a


def sign_normalize(v: np.ndarray) -> np.ndarray:
    """Per-column signs making the largest-magnitude entry of each column positive.

    Ties are broken by the first index; all-zero columns get sign +1.
    """
    v = np.atleast_2d(v)
    idx = np.argmax(np.abs(v), axis=0)
    signs = np.sign(v[idx, np.arange(v.shape[1])])
    signs[signs == 0] = 1.0
    return signs


def svd(m) -> SvdFactors:
    """Thin SVD with singular values descending and sign-normalized ``v`` columns."""
    a = as_matrix(m)
    u, s, vt = np.linalg.svd(a, full_matrices=False)
    v = vt.T
    signs = sign_normalize(v)
    return SvdFactors(u=u * signs, singular_values=s, v=v * signs)


def qr(m) -> QrFactors:
    """Reduced QR decomposition; requires at least as many rows as columns."""
    a = as_matrix(m)
    if a.shape[0] < a.shape[1]:
        raise InvalidInputError(
            f"qr needs rows >= cols, got {a.shape[0]} rows and {a.shape[1]} cols"
        )
    q, r = np.linalg.qr(a, mode="reduced")
    return QrFactors(q=q, r=np.triu(r))


def check_symmetric(a: np.ndarray, name: str = "matrix") -> None:
    if a.shape[0] != a.shape[1]:
        raise InvalidInputError(f"{name} must be square, got shape {a.shape}")
    scale = max(1.0, float(np.max(np.abs(a))))
    asym = float(np.max(np.abs(a - a.T)))
    if asym > SYMMETRY_TOL * scale:
        i, j = np.unravel_index(np.argmax(np.abs(a - a.T)), a.shape)
        raise InvalidInputError(
            f"{name} is not symmetric: |m[{i},{j}] - m[{j},{i}]| = {asym:.3g}"
        )


def sym_eig(m) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a symmetric matrix, eigenvalues descending.

    Eigenvector columns follow the same sign convention as :func:`svd`.
    """
    a = as_matrix(m)
    check_symmetric(a)
    w, v = np.linalg.eigh(0.5 * (a + a.T))
    w = w[::-1]
    v = v[:, ::-1]
    return w, v * sign_normalize(v)


def sym_sqrt(sigma) -> np.ndarray:
    """Symmetric square root ``R`` with ``R @ R == sigma`` for PSD ``sigma``.

    Eigenvalues in ``[-1e-8 * max(1, |lambda|_max), 0)`` are treated as
    round-off and clamped to zero; anything more negative raises NotPSDError.
    """
    w, v = sym_eig(sigma)
    tol = PSD_CLAMP_TOL * max(1.0, float(np.max(np.abs(w))))
    if w[-1] < -tol:
        raise NotPSDError(f"matrix is not PSD: smallest eigenvalue {w[-1]:.6g}")
    root = (v * np.sqrt(np.clip(w, 0.0, None))) @ v.T
    return 0.5 * (root + root.T)


def soft_threshold(x, delta):
    """``sign(x) * max(|x| - delta, 0)``; works on scalars and arrays."""
    if np.any(np.asarray(delta) < 0):
        raise InvalidInputError("soft_threshold needs delta >= 0")
    out = np.sign(x) * np.maximum(np.abs(x) - delta, 0.0)
    if np.ndim(out) == 0:
        return float(out)
    return out
