"""Feature-grouping-and-sparsity (FGS) regression solver.

Minimizes::

    S(beta) = ||y - X beta||^2 + lam ||beta||^2
              + lam1 * sum_l min(|beta_l| / tau, 1)
              + lam2 * sum_{l<l'} min(|beta_l - beta_l'| / tau, 1)
              + lam3 * sum_l min(beta_l, 0)^2

over all pairs of the complete graph. The truncated penalties are handled by
a difference-of-convex outer loop; each convex subproblem is rewritten with
slack variables ``s_ab = beta_a - beta_b`` for the currently active pairs and
solved by coordinate descent on its augmented Lagrangian, with multipliers
``t_ab`` and a penalty weight ``nu`` that grows geometrically.

Pair quantities (slack, multipliers, active mask) are stored as dense
``p x p`` arrays of which only the strict upper triangle is meaningful.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np
from numba import njit

from .errors import DivergenceError, InvalidInputError
from .linalg import soft_threshold

log = logging.getLogger(__name__)


class DegenerateCoordinateWarning(UserWarning):
    """A coordinate has zero curvature and was set to 0."""


@dataclass(frozen=True)
class SolverControls:
    rho: float = 1.05
    nu0: float = 1.0
    delta_star: float = 1e-5
    max_inner: int = 10000
    max_outer: int = 100
    outer_tol: float = 1e-8

    def __post_init__(self):
        if not self.rho > 1:
            raise InvalidInputError(f"rho must be > 1, got {self.rho}")
        if not self.nu0 > 0:
            raise InvalidInputError(f"nu0 must be > 0, got {self.nu0}")
        if not self.delta_star > 0:
            raise InvalidInputError(f"delta_star must be > 0, got {self.delta_star}")
        if self.max_inner < 1 or self.max_outer < 1:
            raise InvalidInputError("iteration caps must be >= 1")
        if self.outer_tol < 0:
            raise InvalidInputError("outer_tol must be >= 0")


@dataclass(frozen=True, eq=False)
class FgsProblem:
    """One FGS regression problem.

    Build from a design matrix and response, or use :meth:`from_gram` when only
    ``X^T X``, ``X^T y`` and ``y^T y`` are available (covariance mode).
    """

    x: np.ndarray | None
    y: np.ndarray | None
    lam: float = 0.0
    lam1: float = 0.0
    lam2: float = 0.0
    tau: float = 1.0
    lam3: float = 0.0
    gram: np.ndarray = None
    xty: np.ndarray = None
    yty: float = None

    def __post_init__(self):
        if not self.tau > 0:
            raise InvalidInputError(f"tau must be > 0, got {self.tau}")
        for name in ("lam", "lam1", "lam2", "lam3"):
            val = getattr(self, name)
            if not (np.isfinite(val) and val >= 0):
                raise InvalidInputError(f"{name} must be finite and >= 0, got {val}")
        if self.x is not None:
            x = np.asarray(self.x, dtype=float)
            y = np.asarray(self.y, dtype=float).ravel()
            if x.ndim != 2 or y.shape[0] != x.shape[0]:
                raise InvalidInputError(
                    f"x has shape {x.shape} but y has length {y.shape[0]}"
                )
            if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
                raise InvalidInputError("x and y must be finite")
            object.__setattr__(self, "x", x)
            object.__setattr__(self, "y", y)
            object.__setattr__(self, "gram", x.T @ x)
            object.__setattr__(self, "xty", x.T @ y)
            object.__setattr__(self, "yty", float(y @ y))
        elif self.gram is None:
            raise InvalidInputError("need either x, y or gram, xty, yty")

    @classmethod
    def from_gram(cls, gram, xty, yty, **params) -> "FgsProblem":
        gram = np.asarray(gram, dtype=float)
        xty = np.asarray(xty, dtype=float).ravel()
        if gram.ndim != 2 or gram.shape != (xty.size, xty.size):
            raise InvalidInputError(
                f"gram {gram.shape} does not match xty of length {xty.size}"
            )
        return cls(x=None, y=None, gram=gram, xty=xty, yty=float(yty), **params)

    @property
    def p(self) -> int:
        return self.gram.shape[0]

    @property
    def nn(self) -> bool:
        return self.lam3 > 0


class ActiveSets(NamedTuple):
    """Masks from the previous outer iterate.

    ``f``: coordinates below the threshold (soft-thresholded);
    ``e``: strict-upper-triangular mask of pairs closer than the threshold;
    ``n``: negative coordinates (non-negative variant only).
    """

    f: np.ndarray
    e: np.ndarray
    n: np.ndarray


@dataclass(frozen=True, eq=False)
class FgsState:
    beta: np.ndarray
    slack: np.ndarray
    multipliers: np.ndarray
    nu: float
    set_f: np.ndarray
    set_e_active: np.ndarray
    set_n: np.ndarray

    @classmethod
    def initial(cls, beta, tau: float, nn: bool = False, nu: float = 1.0) -> "FgsState":
        """Feasible starting state: slack equals pairwise differences, zero multipliers."""
        beta = np.array(beta, dtype=float)
        sets = update_sets(beta, tau, nn)
        return cls(
            beta=beta,
            slack=np.triu(beta[:, None] - beta[None, :], 1),
            multipliers=np.zeros((beta.size, beta.size)),
            nu=float(nu),
            set_f=sets.f,
            set_e_active=sets.e,
            set_n=sets.n,
        )


class FgsSolution(NamedTuple):
    beta: np.ndarray
    objective_trace: list
    inner_iterations: list


def _check_beta(problem: FgsProblem, beta) -> np.ndarray:
    beta = np.asarray(beta, dtype=float).ravel()
    if beta.size != problem.p:
        raise InvalidInputError(f"beta has length {beta.size}, expected {problem.p}")
    return beta


def pair_penalty(beta: np.ndarray, tau: float) -> float:
    """``sum_{l<l'} min(|beta_l - beta_l'| / tau, 1)`` over the complete graph."""
    d = np.abs(beta[:, None] - beta[None, :])
    iu = np.triu_indices(beta.size, 1)
    return float(np.minimum(d[iu] / tau, 1.0).sum())


def objective(problem: FgsProblem, beta) -> float:
    """The non-convex FGS objective ``S(beta)``."""
    beta = _check_beta(problem, beta)
    if problem.x is not None:
        r = problem.y - problem.x @ beta
        rss = float(r @ r)
    else:
        rss = problem.yty - 2.0 * float(problem.xty @ beta) + float(beta @ problem.gram @ beta)
    tau = problem.tau
    val = rss + problem.lam * float(beta @ beta)
    if problem.lam1:
        val += problem.lam1 * float(np.minimum(np.abs(beta) / tau, 1.0).sum())
    if problem.lam2:
        val += problem.lam2 * pair_penalty(beta, tau)
    if problem.lam3:
        val += problem.lam3 * float((np.minimum(beta, 0.0) ** 2).sum())
    return val


def update_sets(beta_prev, tau: float, nn: bool = False) -> ActiveSets:
    beta_prev = np.asarray(beta_prev, dtype=float)
    if not tau > 0:
        raise InvalidInputError(f"tau must be > 0, got {tau}")
    f = np.abs(beta_prev) < tau
    e = np.triu(np.abs(beta_prev[:, None] - beta_prev[None, :]) < tau, 1)
    n = beta_prev < 0 if nn else np.zeros(beta_prev.size, dtype=bool)
    return ActiveSets(f, e, n)


def augmented_lagrangian(problem: FgsProblem, state: FgsState) -> float:
    """Augmented Lagrangian of the current convex subproblem at ``state``."""
    beta = state.beta
    rss = problem.yty - 2.0 * float(problem.xty @ beta) + float(beta @ problem.gram @ beta)
    tau = problem.tau
    e = state.set_e_active
    resid = (beta[:, None] - beta[None, :] - state.slack)[e]
    val = rss + problem.lam * float(beta @ beta)
    val += problem.lam3 * float((beta[state.set_n] ** 2).sum())
    val += problem.lam1 / tau * float(np.abs(beta[state.set_f]).sum())
    val += problem.lam2 / tau * float(np.abs(state.slack[e]).sum())
    val += float(state.multipliers[e] @ resid)
    val += 0.5 * state.nu * float(resid @ resid)
    return val


def coordinate_update_beta(state: FgsState, problem: FgsProblem, l: int) -> float:
    """Minimizer of the augmented Lagrangian over ``beta_l`` with all else fixed."""
    g = problem.gram
    beta = state.beta
    e = state.set_e_active
    nu = state.nu
    partial = problem.xty[l] - g[l] @ beta + g[l, l] * beta[l]
    gamma = 2.0 * partial
    # pairs (l, b) with l first, then (a, l) with l second
    right = np.flatnonzero(e[l, l + 1:]) + l + 1
    left = np.flatnonzero(e[:l, l])
    gamma += np.sum(-state.multipliers[l, right] + nu * (beta[right] + state.slack[l, right]))
    gamma += np.sum(state.multipliers[left, l] + nu * (beta[left] - state.slack[left, l]))
    alpha = 2.0 * problem.lam + 2.0 * g[l, l] + nu * (right.size + left.size)
    if state.set_n[l]:
        alpha += 2.0 * problem.lam3
    if state.set_f[l]:
        gamma = soft_threshold(gamma, problem.lam1 / problem.tau)
    if alpha == 0:
        warnings.warn(
            f"coordinate {l} has zero curvature; setting it to 0",
            DegenerateCoordinateWarning,
            stacklevel=2,
        )
        return 0.0
    return float(gamma / alpha)


def coordinate_update_slack(state: FgsState, problem: FgsProblem, pair: tuple[int, int]) -> float:
    a, b = pair
    if not a < b:
        raise InvalidInputError(f"pair must satisfy a < b, got {pair}")
    if not state.set_e_active[a, b]:
        return state.slack[a, b]
    z = state.multipliers[a, b] + state.nu * (state.beta[a] - state.beta[b])
    return soft_threshold(z, problem.lam2 / problem.tau) / state.nu


def update_multipliers(state: FgsState, controls: SolverControls) -> FgsState:
    """One multiplier step on the active pairs, then ``nu <- rho * nu``."""
    beta = state.beta
    e = state.set_e_active
    resid = beta[:, None] - beta[None, :] - state.slack
    mult = state.multipliers.copy()
    mult[e] += state.nu * resid[e]
    return replace(state, multipliers=mult, nu=state.nu * controls.rho)


@njit(cache=True, nogil=True)
def _inner_loop(gram, xty, beta, slack, mult, e, f, n, nu, rho,
                lam, lam3, thr1, thr2, delta, max_inner, use_pairs):
    # Mutates beta, slack, mult in place. Returns (iterations, nu, finite).
    p = beta.size
    beta_old = np.empty(p)
    for k in range(1, max_inner + 1):
        for l in range(p):
            beta_old[l] = beta[l]
        if use_pairs:
            for a in range(p):
                for b in range(a + 1, p):
                    if e[a, b]:
                        mult[a, b] += nu * (beta[a] - beta[b] - slack[a, b])
        nu *= rho

        for l in range(p):
            partial = xty[l]
            for j in range(p):
                if j != l:
                    partial -= gram[l, j] * beta[j]
            gamma = 2.0 * partial
            alpha = 2.0 * lam + 2.0 * gram[l, l]
            if n[l]:
                alpha += 2.0 * lam3
            if use_pairs:
                deg = 0
                for b in range(l + 1, p):
                    if e[l, b]:
                        deg += 1
                        gamma += -mult[l, b] + nu * (beta[b] + slack[l, b])
                for a in range(l):
                    if e[a, l]:
                        deg += 1
                        gamma += mult[a, l] + nu * (beta[a] - slack[a, l])
                alpha += nu * deg
            if f[l]:
                mag = abs(gamma) - thr1
                if mag > 0.0:
                    gamma = mag if gamma > 0.0 else -mag
                else:
                    gamma = 0.0
            if alpha > 0.0:
                beta[l] = gamma / alpha
            else:
                beta[l] = 0.0

        # the stop rule covers slack too: a slack jump after an unchanged
        # beta sweep must not end the loop
        diff = 0.0
        if use_pairs:
            for a in range(p):
                for b in range(a + 1, p):
                    if e[a, b]:
                        z = mult[a, b] + nu * (beta[a] - beta[b])
                        mag = abs(z) - thr2
                        if mag > 0.0:
                            s_new = (mag if z > 0.0 else -mag) / nu
                        else:
                            s_new = 0.0
                        d = abs(s_new - slack[a, b])
                        if d > diff:
                            diff = d
                        slack[a, b] = s_new

        for l in range(p):
            d = abs(beta[l] - beta_old[l])
            if not np.isfinite(beta[l]):
                return k, nu, False
            if d > diff:
                diff = d
        if diff < delta:
            return k, nu, True
    return max_inner, nu, True


def ridge_solution(problem: FgsProblem) -> np.ndarray:
    """``(X^T X + lam I)^{-1} X^T y``; least-norm solution when singular."""
    a = problem.gram + problem.lam * np.eye(problem.p)
    try:
        return np.linalg.solve(a, problem.xty)
    except np.linalg.LinAlgError:
        return np.linalg.lstsq(a, problem.xty, rcond=None)[0]


def solve(problem: FgsProblem, controls: SolverControls | None = None, beta_init=None) -> FgsSolution:
    """Run the DC / augmented-Lagrangian / coordinate-descent solver.

    Parameters
    ----------
    problem : FgsProblem
    controls : SolverControls, optional
    beta_init : array, optional
        Starting point; defaults to the ridge solution.

    Returns
    -------
    FgsSolution
        ``beta``, ``objective_trace`` (objective at the start point followed by
        each accepted outer iterate, so it is non-increasing) and the number of
        inner iterations used by each outer iteration.

    The inner loop stops once neither ``beta`` nor any active slack moved by
    ``delta_star`` or more during a full sweep.

    An outer iterate that fails to lower the objective is discarded and the
    loop stops, so the returned point is never worse than ``beta_init``.
    """
    controls = controls or SolverControls()
    if beta_init is None:
        beta = ridge_solution(problem)
    else:
        beta = _check_beta(problem, beta_init).copy()
    if not np.all(np.isfinite(beta)):
        raise InvalidInputError("beta_init must be finite")

    p = problem.p
    use_pairs = problem.lam2 > 0
    slack = np.triu(beta[:, None] - beta[None, :], 1)
    thr1 = problem.lam1 / problem.tau
    thr2 = problem.lam2 / problem.tau

    s_prev = objective(problem, beta)
    trace = [s_prev]
    inner_counts = []
    for m in range(1, controls.max_outer + 1):
        sets = update_sets(beta, problem.tau, problem.nn)
        cand = beta.copy()
        cand_slack = slack.copy()
        mult = np.zeros((p, p))
        k, _, finite = _inner_loop(
            problem.gram, problem.xty, cand, cand_slack, mult,
            sets.e, sets.f, sets.n, controls.nu0, controls.rho,
            problem.lam, problem.lam3, thr1, thr2,
            controls.delta_star, controls.max_inner, use_pairs,
        )
        inner_counts.append(int(k))
        if not finite:
            raise DivergenceError(f"non-finite iterate at outer iteration {m}, inner iteration {k}")
        s_new = objective(problem, cand)
        if not np.isfinite(s_new):
            raise DivergenceError(f"non-finite objective at outer iteration {m}, inner iteration {k}")
        if s_new <= s_prev:
            beta, slack = cand, cand_slack
            trace.append(s_new)
        if s_prev - s_new <= controls.outer_tol * (1.0 + abs(s_prev)):
            break
        s_prev = s_new
    log.debug("fgs solve: %d outer iterations, inner %s", len(inner_counts), inner_counts)
    return FgsSolution(beta, trace, inner_counts)
