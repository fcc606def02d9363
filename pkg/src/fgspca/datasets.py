"""Built-in datasets, synthetic covariance builders and CSV ingestion."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from .errors import DataError, InvalidInputError, NotPSDError
from .linalg import PSD_CLAMP_TOL, as_matrix, check_symmetric, sym_sqrt

KINDS = ("data_matrix", "covariance")


@dataclass(frozen=True, eq=False)
class DatasetInput:
    """A centered data matrix (n x p) or a covariance matrix (p x p).

    Everything downstream depends on the data only through the Gram matrix
    ``X^T X``; in covariance mode the design is the symmetric square root.
    """

    kind: str
    matrix: np.ndarray
    variable_names: tuple = None
    name: str = ""
    notes: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidInputError(f"kind must be one of {KINDS}, got {self.kind!r}")
        m = as_matrix(self.matrix, self.kind)
        if self.kind == "covariance":
            check_symmetric(m, "covariance")
            w = np.linalg.eigvalsh(0.5 * (m + m.T))
            tol = PSD_CLAMP_TOL * max(1.0, float(np.max(np.abs(w))))
            if w[0] < -tol:
                raise NotPSDError(f"covariance is not PSD: smallest eigenvalue {w[0]:.6g}")
        else:
            m = m - m.mean(axis=0)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        names = self.variable_names
        if names is None:
            names = tuple(f"X{i + 1}" for i in range(m.shape[1]))
        names = tuple(str(s) for s in names)
        if len(names) != m.shape[1]:
            raise InvalidInputError(
                f"{len(names)} variable names for {m.shape[1]} variables"
            )
        object.__setattr__(self, "variable_names", names)

    @property
    def p(self) -> int:
        return self.matrix.shape[1]

    @cached_property
    def gram(self) -> np.ndarray:
        if self.kind == "covariance":
            return np.array(self.matrix)
        return self.matrix.T @ self.matrix

    @cached_property
    def design(self) -> np.ndarray:
        """A matrix ``X`` with ``X^T X == gram``."""
        if self.kind == "covariance":
            return sym_sqrt(self.matrix)
        return np.array(self.matrix)

    @property
    def total_variance(self) -> float:
        return float(np.trace(self.gram))


# Jeffers' (1967) pitprops correlation matrix, 180 observations, as distributed
# with the R ``elasticnet`` package (``data(pitprops)``), three decimals.
PITPROPS_NAMES = (
    "topdiam", "length", "moist", "testsg", "ovensg", "ringtop", "ringbut",
    "bowmax", "bowdist", "whorls", "clear", "knots", "diaknot",
)
_PITPROPS_LOWER = """
1.000
0.954 1.000
0.364 0.297 1.000
0.342 0.284 0.882 1.000
-0.129 -0.118 -0.148 0.220 1.000
0.313 0.291 0.153 0.381 0.364 1.000
0.496 0.503 -0.029 0.174 0.296 0.813 1.000
0.424 0.419 -0.054 -0.059 0.004 0.090 0.372 1.000
0.592 0.648 0.125 0.137 -0.039 0.211 0.465 0.482 1.000
0.545 0.569 -0.081 -0.014 0.037 0.274 0.679 0.557 0.526 1.000
0.084 0.076 0.162 0.097 -0.091 -0.036 -0.113 0.061 0.085 -0.319 1.000
-0.019 -0.036 0.220 0.169 -0.145 0.024 -0.232 -0.357 -0.127 -0.368 0.029 1.000
0.134 0.144 0.126 0.015 -0.208 -0.329 -0.424 -0.202 -0.076 -0.291 0.007 0.184 1.000
"""


def _from_lower(text: str) -> np.ndarray:
    rows = [[float(t) for t in line.split()] for line in text.strip().splitlines()]
    p = len(rows)
    m = np.zeros((p, p))
    for i, row in enumerate(rows):
        m[i, : i + 1] = row
    return m + np.tril(m, -1).T


def pitprops() -> DatasetInput:
    """The 13 x 13 pitprops correlation matrix."""
    return DatasetInput(
        "covariance", _from_lower(_PITPROPS_LOWER), PITPROPS_NAMES, name="pitprops",
        notes={"source": "Jeffers (1967) via R elasticnet::pitprops"},
    )


# Three-factor model: V1 ~ N(0, 290), V2 ~ N(0, 300), V3 = -0.3 V1 + 0.925 V2 + eps.
FACTOR_VARIANCES = (290.0, 300.0)
V3_COEFS = (-0.3, 0.925)
HIDDEN3_BLOCKS = (4, 4, 2)
# Covariances of the shared tenth factor in the hidden-groups model.
V10_COV = (290.0, 300.0, 282.7875)
V10_VAR = 295.0


def factor_covariance(noise: bool = True) -> np.ndarray:
    """Exact 3 x 3 covariance of (V1, V2, V3)."""
    v1, v2 = FACTOR_VARIANCES
    a, b = V3_COEFS
    var3 = a * a * v1 + b * b * v2 + (1.0 if noise else 0.0)
    return np.array([
        [v1, 0.0, a * v1],
        [0.0, v2, b * v2],
        [a * v1, b * v2, var3],
    ])


def _block_loadings(sizes, offset: int, width: int) -> np.ndarray:
    """Indicator rows mapping each variable to its factor column."""
    rows = []
    for k, s in enumerate(sizes):
        e = np.zeros(width)
        e[offset + k] = 1.0
        rows.extend([e] * s)
    return np.array(rows)


def hidden_factors_covariance(noise: bool = True) -> DatasetInput:
    """Exact covariance of X1..X10 built on three hidden factors.

    ``X_j = V_a + eps_j`` with blocks X1-X4 on V1, X5-X8 on V2, X9-X10 on V3.
    With ``noise=False`` both the unit noise in V3 and the unit noise on every
    X_j are dropped; the covariance then has rank 2.
    """
    load = _block_loadings(HIDDEN3_BLOCKS, 0, 3)
    cov = load @ factor_covariance(noise) @ load.T
    if noise:
        cov += np.eye(cov.shape[0])
    return DatasetInput("covariance", cov, name="hidden3", notes={"noise": noise})


def hidden_groups_factor_covariance() -> np.ndarray:
    """Covariance of the ten factors (V1..V3 for each of three groups, then V10).

    As stated this matrix is indefinite; see :func:`hidden_groups_covariance`.
    """
    cf = np.zeros((10, 10))
    c3 = factor_covariance(noise=True)
    for g in range(3):
        cf[3 * g:3 * g + 3, 3 * g:3 * g + 3] = c3
    cf[9, :9] = cf[:9, 9] = V10_COV * 3
    cf[9, 9] = V10_VAR
    return cf


def hidden_groups_expansion(block_sizes=(12, 12, 6)) -> np.ndarray:
    """Raw 100 x 100 covariance expansion of the three-group model.

    The first ``3 * sum(block_sizes)`` variables load on one factor each, group
    by group; the remaining ten are ``sum of all nine group factors + V10 + eps``.
    Every variable carries unit noise. Because the stated factor covariances
    are not jointly realizable, the result has negative eigenvalues.
    """
    sizes = tuple(int(s) for s in block_sizes)
    if len(sizes) != 3 or min(sizes) < 1:
        raise InvalidInputError(f"need three positive block sizes, got {block_sizes}")
    load = np.vstack(
        [_block_loadings(sizes, 3 * g, 10) for g in range(3)]
        + [np.ones((10, 10))]
    )
    return load @ hidden_groups_factor_covariance() @ load.T + np.eye(load.shape[0])


def hidden_groups_covariance(block_sizes=(12, 12, 6)) -> DatasetInput:
    """Nearest PSD matrix (Frobenius norm) to :func:`hidden_groups_expansion`.

    Negative eigenvalues are clipped to zero; the size of the change is kept
    in ``notes``.
    """
    cov = hidden_groups_expansion(block_sizes)
    w, v = np.linalg.eigh(cov)
    fixed = (v * np.clip(w, 0.0, None)) @ v.T
    fixed = 0.5 * (fixed + fixed.T)
    notes = {
        "repair": "negative eigenvalues clipped",
        "min_eigenvalue_before": float(w[0]),
        "max_abs_change": float(np.max(np.abs(fixed - cov))),
    }
    return DatasetInput("covariance", fixed, name="hidden-groups", notes=notes)


def sample_hidden_factors(n: int, seed: int = 0) -> DatasetInput:
    """Draw ``n`` rows from the three-factor model and center the columns."""
    if n < 2:
        raise InvalidInputError(f"need n >= 2 samples, got {n}")
    rng = np.random.default_rng(seed)
    v1 = rng.normal(0.0, np.sqrt(FACTOR_VARIANCES[0]), n)
    v2 = rng.normal(0.0, np.sqrt(FACTOR_VARIANCES[1]), n)
    v3 = V3_COEFS[0] * v1 + V3_COEFS[1] * v2 + rng.normal(0.0, 1.0, n)
    factors = np.column_stack([v1, v2, v3])
    load = _block_loadings(HIDDEN3_BLOCKS, 0, 3)
    x = factors @ load.T + rng.normal(0.0, 1.0, (n, load.shape[0]))
    return DatasetInput("data_matrix", x, name=f"hidden3-sample-n{n}-seed{seed}")


def load_csv(path, has_header: bool = False, mode: str = "data_matrix") -> DatasetInput:
    """Read a numeric CSV as a data matrix (centered) or a covariance matrix."""
    path = Path(path)
    if mode not in KINDS:
        raise InvalidInputError(f"mode must be one of {KINDS}, got {mode!r}")
    with path.open(newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    names = None
    if has_header:
        if not rows:
            raise DataError(f"{path}: empty file")
        names = tuple(c.strip() for c in rows[0])
        rows = rows[1:]
    if not rows:
        raise DataError(f"{path}: no data rows")
    width = len(rows[0])
    values = np.empty((len(rows), width))
    first = 2 if has_header else 1
    for i, row in enumerate(rows):
        if len(row) != width:
            raise DataError(
                f"{path}: row {i + first} has {len(row)} fields, expected {width}"
            )
        for j, cell in enumerate(row):
            try:
                values[i, j] = float(cell)
            except ValueError:
                raise DataError(
                    f"{path}: row {i + first}, column {j + 1}: not a number: {cell!r}"
                ) from None
    try:
        return DatasetInput(mode, values, names, name=path.stem)
    except InvalidInputError as exc:
        raise DataError(f"{path}: {exc}") from exc
