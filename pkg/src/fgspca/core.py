"""Alternating FGSPCA driver, its SPCA and non-negative special cases, and
the PCA / simple-thresholding baselines.

Criterion, with ``A^T A = I``::

    ||X - X B A^T||^2 + sum_j [lam ||b_j||^2 + lam1_j p1(b_j) + lam2 p2(b_j) + lam3 p3(b_j)]

The B-step splits into k independent FGS regressions with responses
``X a_j``; the A-step is a Procrustes rotation of ``X^T X B``.
"""

from __future__ import annotations

import logging
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .datasets import DatasetInput
from .errors import InvalidInputError
from .linalg import sign_normalize, svd
from .solver import FgsProblem, SolverControls, pair_penalty, solve
from .variance import VarianceReport, variance_report

log = logging.getLogger(__name__)

SPCA_TAU_SCALE = 1e6


class NonUniqueRotationWarning(UserWarning):
    """The Procrustes input is rank deficient, so the rotation is not unique."""


class ZeroComponentWarning(UserWarning):
    """A whole column of B was shrunk to zero."""


@dataclass(frozen=True)
class FgspcaConfig:
    k: int
    lam: float = 0.05
    lam1: float | tuple = 0.1
    lam2: float = 0.005
    tau: float = 0.05
    lam3: float = 0.0
    max_alternations: int = 200
    alternation_tol: float = 1e-6
    n_jobs: int = 1

    def __post_init__(self):
        if self.k < 1:
            raise InvalidInputError(f"k must be >= 1, got {self.k}")
        if not self.tau > 0:
            raise InvalidInputError(f"tau must be > 0, got {self.tau}")
        lam1 = np.atleast_1d(np.asarray(self.lam1, dtype=float))
        if lam1.size not in (1, self.k):
            raise InvalidInputError(f"lam1 needs 1 or k={self.k} values, got {lam1.size}")
        if not isinstance(self.lam1, (int, float)):
            object.__setattr__(self, "lam1", tuple(float(a) for a in lam1))
        for name, val in (("lam", self.lam), ("lam2", self.lam2), ("lam3", self.lam3)):
            if not (np.isfinite(val) and val >= 0):
                raise InvalidInputError(f"{name} must be finite and >= 0, got {val}")
        if not (np.all(np.isfinite(lam1)) and np.all(lam1 >= 0)):
            raise InvalidInputError("lam1 must be finite and >= 0")
        if self.max_alternations < 1 or not self.alternation_tol > 0:
            raise InvalidInputError("need max_alternations >= 1 and alternation_tol > 0")
        if self.n_jobs < 1:
            raise InvalidInputError("n_jobs must be >= 1")

    def lam1_vector(self) -> np.ndarray:
        return np.broadcast_to(np.asarray(self.lam1, dtype=float), (self.k,)).copy()


@dataclass
class FgspcaResult:
    a: np.ndarray
    b: np.ndarray
    v: np.ndarray
    alternations: int
    converged: bool
    objective_trace: list
    method: str = "fgspca"
    zero_columns: tuple = ()
    report: VarianceReport = None
    config: dict = field(default_factory=dict)


def procrustes_rotation(m) -> np.ndarray:
    """``U V^T`` from the thin SVD of ``m`` (p x k): the orthonormal ``A``
    maximizing ``trace(A^T m)``."""
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[1] > m.shape[0]:
        raise InvalidInputError(f"procrustes needs a p x k matrix with k <= p, got {m.shape}")
    f = svd(m)
    s = f.singular_values
    if s.size and s[-1] < 1e-12 * max(s[0], np.finfo(float).tiny):
        warnings.warn("rank-deficient Procrustes input; rotation is not unique",
                      NonUniqueRotationWarning, stacklevel=2)
    return f.u @ f.v.T


def criterion(gram: np.ndarray, a: np.ndarray, b: np.ndarray, config: FgspcaConfig) -> float:
    """Full alternating criterion; assumes ``a`` has orthonormal columns."""
    val = float(np.trace(gram) - 2.0 * np.sum(a * (gram @ b)) + np.sum(b * (gram @ b)))
    lam1 = config.lam1_vector()
    for j in range(b.shape[1]):
        bj = b[:, j]
        val += config.lam * float(bj @ bj)
        if lam1[j]:
            val += lam1[j] * float(np.minimum(np.abs(bj) / config.tau, 1.0).sum())
        if config.lam2:
            val += config.lam2 * pair_penalty(bj, config.tau)
        if config.lam3:
            val += config.lam3 * float((np.minimum(bj, 0.0) ** 2).sum())
    return val


def default_controls(config: FgspcaConfig) -> SolverControls:
    return SolverControls(delta_star=min(1e-5, 0.01 * config.alternation_tol))


def _b_step(gram, a, b_prev, config, controls, pool) -> np.ndarray:
    lam1 = config.lam1_vector()

    def one(j):
        c = gram @ a[:, j]
        problem = FgsProblem.from_gram(
            gram, c, float(a[:, j] @ c), lam=config.lam, lam1=lam1[j],
            lam2=config.lam2, tau=config.tau, lam3=config.lam3,
        )
        return solve(problem, controls, beta_init=b_prev[:, j]).beta

    if pool is None:
        cols = [one(j) for j in range(a.shape[1])]
    else:
        cols = list(pool.map(one, range(a.shape[1])))
    return np.column_stack(cols)


def _check_k(data: DatasetInput, k: int) -> None:
    rank_cap = min(data.design.shape)
    if k > rank_cap:
        raise InvalidInputError(f"k={k} exceeds min(n, p)={rank_cap}")


def _normalize(b: np.ndarray) -> tuple[np.ndarray, tuple]:
    norms = np.linalg.norm(b, axis=0)
    zero = tuple(int(j) for j in np.flatnonzero(norms == 0))
    v = np.zeros_like(b)
    nz = norms > 0
    v[:, nz] = b[:, nz] / norms[nz]
    return v * sign_normalize(v), zero


def fit(data: DatasetInput, config: FgspcaConfig, controls: SolverControls | None = None,
        method: str = "fgspca") -> FgspcaResult:
    """Alternate B-steps and A-steps from the ordinary PCA loadings.

    Without explicit ``controls`` the inner tolerance is set to
    ``alternation_tol / 100``: coordinate descent on strongly correlated
    columns contracts slowly, and a looser inner stop leaves B-step errors
    larger than the alternation tolerance itself.
    """
    controls = controls or default_controls(config)
    _check_k(data, config.k)
    gram = data.gram
    a = svd(data.design).v[:, : config.k].copy()
    b = a.copy()
    trace = [criterion(gram, a, b, config)]
    converged = False
    pool = ThreadPoolExecutor(config.n_jobs) if config.n_jobs > 1 else None
    try:
        for it in range(1, config.max_alternations + 1):
            b_new = _b_step(gram, a, b, config, controls, pool)
            a = procrustes_rotation(gram @ b_new)
            delta = float(np.max(np.abs(b_new - b)))
            b = b_new
            trace.append(criterion(gram, a, b, config))
            log.debug("alternation %d: max|dB| = %.3g, criterion = %.10g", it, delta, trace[-1])
            if delta < config.alternation_tol:
                converged = True
                break
    finally:
        if pool is not None:
            pool.shutdown()
    v, zero = _normalize(b)
    if zero:
        warnings.warn(f"components {zero} have all-zero loadings", ZeroComponentWarning, stacklevel=2)
    return FgspcaResult(
        a=a, b=b, v=v, alternations=it, converged=converged, objective_trace=trace,
        method=method, zero_columns=zero,
        report=variance_report(data.design, v, method),
        config=_config_dict(config, controls),
    )


def fit_spca(data: DatasetInput, k: int, lam: float = 0.05, lam1=0.0,
             controls: SolverControls | None = None, max_alternations: int = 200,
             alternation_tol: float = 1e-6, n_jobs: int = 1) -> FgspcaResult:
    """Lasso-penalized sparse PCA as the no-grouping, never-truncated special case.

    ``lam1`` (scalar or per component) is the lasso weight on ``||b_j||_1``.
    Internally the truncation threshold is set far above any attainable
    coefficient so that ``lam1_internal * min(|b|/tau, 1) == lam1 * |b|``.
    """
    tau = SPCA_TAU_SCALE * max(1.0, float(np.sqrt(np.max(np.diag(data.gram)))))
    lam1 = np.atleast_1d(np.asarray(lam1, dtype=float))
    for _ in range(5):
        config = FgspcaConfig(
            k=k, lam=lam, lam1=tuple(lam1 * tau), lam2=0.0, tau=tau,
            max_alternations=max_alternations, alternation_tol=alternation_tol, n_jobs=n_jobs,
        )
        result = fit(data, config, controls, method="spca")
        if np.max(np.abs(result.b)) < tau:
            break
        tau *= 1e3
    else:
        raise InvalidInputError("could not find a truncation threshold above all coefficients")
    result.config.update(lam1=[float(x) for x in lam1], tau=tau, mode="spca")
    return result


def fit_nn(data: DatasetInput, config: FgspcaConfig, controls: SolverControls | None = None) -> FgspcaResult:
    """FGSPCA with the squared-negative-part penalty; ``lam3 = 0`` reduces to :func:`fit`."""
    return fit(data, config, controls, method="nnfgspca")


def pca(data: DatasetInput, k: int) -> FgspcaResult:
    """Ordinary PCA loadings from the thin SVD of the design."""
    _check_k(data, k)
    v = svd(data.design).v[:, :k].copy()
    return FgspcaResult(
        a=v, b=v, v=v, alternations=0, converged=True, objective_trace=[],
        method="pca", report=variance_report(data.design, v, "pca"), config={"k": k},
    )


def simple_thresholding(data: DatasetInput, cardinalities) -> FgspcaResult:
    """Keep the ``c_j`` largest-magnitude PCA loadings of component j, renormalize.

    Magnitudes equal to within 1e-9 count as ties and are broken toward the
    later variable.
    """
    cards = [int(c) for c in cardinalities]
    p = data.p
    if any(c < 1 or c > p for c in cards):
        raise InvalidInputError(f"cardinalities must lie in 1..{p}, got {cards}")
    base = pca(data, len(cards)).v
    v = np.zeros_like(base)
    for j, c in enumerate(cards):
        mag = np.round(np.abs(base[:, j]), 9)
        order = np.lexsort((-np.arange(p), -mag))
        keep = order[:c]
        v[keep, j] = base[keep, j]
        v[:, j] /= np.linalg.norm(v[:, j])
    v = v * sign_normalize(v)
    return FgspcaResult(
        a=v, b=v, v=v, alternations=0, converged=True, objective_trace=[],
        method="threshold", report=variance_report(data.design, v, "threshold"),
        config={"cardinalities": cards},
    )


def _config_dict(config: FgspcaConfig, controls: SolverControls) -> dict:
    lam1 = config.lam1
    return {
        "k": config.k, "lam": config.lam,
        "lam1": list(lam1) if isinstance(lam1, tuple) else lam1,
        "lam2": config.lam2, "tau": config.tau, "lam3": config.lam3,
        "max_alternations": config.max_alternations,
        "alternation_tol": config.alternation_tol,
        "rho": controls.rho, "nu0": controls.nu0, "delta_star": controls.delta_star,
        "max_inner": controls.max_inner, "max_outer": controls.max_outer,
        "outer_tol": controls.outer_tol,
    }
