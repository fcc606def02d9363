"""Explained-variance accounting, group and nonzero counts, model complexity."""

from __future__ import annotations

import warnings
from dataclasses import asdict, dataclass

import numpy as np

from .errors import InvalidInputError
from .linalg import as_matrix, qr

METHODS = ("fgspca", "nnfgspca", "spca", "pca", "threshold")
GROUPED_METHODS = ("fgspca", "nnfgspca")
GROUP_TOL = 1e-4
ZERO_TOL = 1e-4

REPORT_ROWS = (
    "No. of Groups",
    "No. of Nonzeroes",
    "Variance (%)",
    "Adjusted Variance (%)",
    "Cum. Adj. Variance (%)",
)


@dataclass(frozen=True)
class VarianceReport:
    method: str
    per_pc_variance_pct: tuple
    per_pc_adjusted_pct: tuple
    cumulative_adjusted_pct: tuple
    total_variance: float
    group_counts: tuple
    nonzero_counts: tuple
    model_complexity: int

    def rows(self) -> dict:
        """Report rows keyed by the table labels, in table order."""
        return dict(zip(REPORT_ROWS, (
            self.group_counts,
            self.nonzero_counts,
            self.per_pc_variance_pct,
            self.per_pc_adjusted_pct,
            self.cumulative_adjusted_pct,
        )))

    def to_dict(self) -> dict:
        return asdict(self)


def _loadings(x: np.ndarray, v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.ndim == 1:
        v = v[:, None]
    v = as_matrix(v, "loadings")
    if v.shape[0] != x.shape[1]:
        raise InvalidInputError(
            f"loadings have {v.shape[0]} rows but the data has {x.shape[1]} variables"
        )
    return v


def raw_variance(x, v) -> np.ndarray:
    """Per-component ``100 * ||X v_j||^2 / tr(X^T X)``."""
    x = as_matrix(x, "x")
    z = x @ _loadings(x, v)
    return 100.0 * np.einsum("ij,ij->j", z, z) / float(np.sum(x * x))


def adjusted_variance(x, v) -> tuple[np.ndarray, np.ndarray]:
    """Adjusted variance from the QR factorization of the scores ``Z = X v``.

    Returns per-component and cumulative percentages of ``tr(X^T X)``.
    """
    x = as_matrix(x, "x")
    v = _loadings(x, v)
    z = x @ v
    if np.any(np.all(z == 0, axis=0)):
        warnings.warn("zero score column; its adjusted variance is 0", RuntimeWarning, stacklevel=2)
    r = qr(z).r
    per = 100.0 * np.diag(r) ** 2 / float(np.sum(x * x))
    return per, np.cumsum(per)


def count_nonzeros(v_col, zero_tol: float = ZERO_TOL) -> int:
    if not zero_tol > 0:
        raise InvalidInputError("zero_tol must be > 0")
    return int(np.sum(np.abs(np.asarray(v_col, dtype=float)) > zero_tol))


def count_groups(v_col, group_tol: float = GROUP_TOL) -> int:
    """Number of single-linkage clusters among the nonzero entries.

    Entries with ``|v| <= group_tol`` are zeros and form no group; two nonzero
    entries share a group when a chain of gaps ``<= group_tol`` joins them.
    """
    if not group_tol > 0:
        raise InvalidInputError("group_tol must be > 0")
    v = np.asarray(v_col, dtype=float).ravel()
    nz = np.sort(v[np.abs(v) > group_tol])
    if nz.size == 0:
        return 0
    return 1 + int(np.sum(np.diff(nz) > group_tol))


def model_complexity(v, method: str, group_tol: float = GROUP_TOL, zero_tol: float = ZERO_TOL) -> int:
    """Groups summed over components for grouped methods, nonzeros otherwise."""
    if method not in METHODS:
        raise InvalidInputError(f"unknown method {method!r}; expected one of {METHODS}")
    v = np.asarray(v, dtype=float)
    if v.ndim == 1:
        v = v[:, None]
    if method in GROUPED_METHODS:
        return sum(count_groups(v[:, j], group_tol) for j in range(v.shape[1]))
    return sum(count_nonzeros(v[:, j], zero_tol) for j in range(v.shape[1]))


def variance_report(x, v, method: str, group_tol: float = GROUP_TOL, zero_tol: float = ZERO_TOL) -> VarianceReport:
    """Full report for loadings ``v`` (p x k) on design ``x``; column order is kept."""
    x = as_matrix(x, "x")
    v = _loadings(x, v)
    per, cum = adjusted_variance(x, v)
    return VarianceReport(
        method=method,
        per_pc_variance_pct=tuple(float(a) for a in raw_variance(x, v)),
        per_pc_adjusted_pct=tuple(float(a) for a in per),
        cumulative_adjusted_pct=tuple(float(a) for a in cum),
        total_variance=float(np.sum(x * x)),
        group_counts=tuple(count_groups(v[:, j], group_tol) for j in range(v.shape[1])),
        nonzero_counts=tuple(count_nonzeros(v[:, j], zero_tol) for j in range(v.shape[1])),
        model_complexity=model_complexity(v, method, group_tol, zero_tol),
    )
