import itertools
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fgspca.errors import DivergenceError, InvalidInputError
from fgspca.solver import (
    DegenerateCoordinateWarning,
    FgsProblem,
    FgsState,
    SolverControls,
    _inner_loop,
    augmented_lagrangian,
    coordinate_update_beta,
    coordinate_update_slack,
    objective,
    ridge_solution,
    solve,
    update_multipliers,
    update_sets,
)

GRID = np.round(np.linspace(-1.0, 1.0, 21), 10)


def naive_objective(x, y, beta, lam, lam1, lam2, tau, lam3):
    # term-by-term, loops only
    n, p = x.shape
    rss = 0.0
    for i in range(n):
        r = y[i]
        for j in range(p):
            r -= x[i, j] * beta[j]
        rss += r * r
    total = rss
    for l in range(p):
        total += lam * beta[l] ** 2
        total += lam1 * min(abs(beta[l]) / tau, 1.0)
        total += lam3 * min(beta[l], 0.0) ** 2
        for m in range(l + 1, p):
            total += lam2 * min(abs(beta[l] - beta[m]) / tau, 1.0)
    return total


def random_problem(rng, n=None, p=None, **over):
    n = n or int(rng.integers(2, 50))
    p = p or int(rng.integers(1, 10))
    x = rng.normal(size=(n, p))
    y = rng.normal(size=n)
    params = dict(
        lam=float(rng.uniform(0, 1)),
        lam1=float(rng.uniform(0, 2)),
        lam2=float(rng.uniform(0, 2)),
        tau=float(rng.uniform(0.05, 1)),
        lam3=float(rng.choice([0.0, rng.uniform(0, 2)])),
    )
    params.update(over)
    return FgsProblem(x, y, **params)


# objective

def test_objective_zero():
    pr = FgsProblem(np.ones((3, 2)), np.zeros(3), lam=1, lam1=1, lam2=1, tau=0.5, lam3=1)
    assert objective(pr, np.zeros(2)) == 0.0


def test_objective_knee():
    tau = 0.3
    x = np.random.default_rng(0).normal(size=(4, 2))
    beta = np.array([tau, tau])
    pr = FgsProblem(x, x @ beta, lam1=1.0, lam2=1.0, tau=tau)
    assert objective(pr, beta) == pytest.approx(2.0, abs=1e-12)


def test_objective_matches_naive():
    rng = np.random.default_rng(1)
    for _ in range(20):
        pr = random_problem(rng)
        beta = rng.normal(size=pr.p)
        expect = naive_objective(pr.x, pr.y, beta, pr.lam, pr.lam1, pr.lam2, pr.tau, pr.lam3)
        assert objective(pr, beta) == pytest.approx(expect, rel=1e-10, abs=1e-10)


def test_objective_gram_form_matches_data_form():
    rng = np.random.default_rng(2)
    pr = random_problem(rng, n=20, p=5)
    pg = FgsProblem.from_gram(pr.gram, pr.xty, pr.yty, lam=pr.lam, lam1=pr.lam1,
                              lam2=pr.lam2, tau=pr.tau, lam3=pr.lam3)
    beta = rng.normal(size=5)
    assert objective(pg, beta) == pytest.approx(objective(pr, beta), rel=1e-10)


def test_objective_dimension_mismatch():
    pr = FgsProblem(np.ones((3, 2)), np.zeros(3))
    with pytest.raises(InvalidInputError):
        objective(pr, np.zeros(3))


@pytest.mark.parametrize("bad", [dict(tau=0.0), dict(lam=-1.0), dict(lam2=np.inf)])
def test_problem_validation(bad):
    with pytest.raises(InvalidInputError):
        FgsProblem(np.ones((3, 2)), np.zeros(3), **bad)


def test_problem_shape_validation():
    with pytest.raises(InvalidInputError):
        FgsProblem(np.ones((3, 2)), np.zeros(4))


@pytest.mark.parametrize("bad", [dict(rho=1.0), dict(nu0=0.0), dict(delta_star=0.0), dict(max_inner=0)])
def test_controls_validation(bad):
    with pytest.raises(InvalidInputError):
        SolverControls(**bad)


# set updates (0-based indices)

def test_update_sets_examples():
    s = update_sets(np.array([0.5, 0.5, 0.0]), 0.05)
    assert np.flatnonzero(s.f).tolist() == [2]
    assert list(zip(*np.nonzero(s.e))) == [(0, 1)]
    assert not s.n.any()

    s = update_sets(np.array([-0.01, 0.02]), 0.05, nn=True)
    assert s.f.all()
    assert list(zip(*np.nonzero(s.e))) == [(0, 1)]
    assert np.flatnonzero(s.n).tolist() == [0]

    s = update_sets(np.full(4, 0.7), 0.05)
    assert not s.f.any()
    assert s.e.sum() == 6 and np.all(np.tril(s.e) == 0)


# single-coordinate updates

def test_beta_update_ridge_scalar():
    rng = np.random.default_rng(3)
    x = rng.normal(size=(10, 1))
    y = rng.normal(size=10)
    pr = FgsProblem(x, y, lam=0.7)
    st0 = FgsState.initial([0.3], pr.tau)
    expect = (x[:, 0] @ y) / (0.7 + x[:, 0] @ x[:, 0])
    assert coordinate_update_beta(st0, pr, 0) == pytest.approx(expect, rel=1e-12)


def test_beta_update_full_shrinkage():
    x = np.ones((3, 1))
    pr = FgsProblem(x, np.full(3, 0.1), lam1=100.0, tau=0.5)
    st0 = FgsState.initial([0.0], pr.tau)
    assert coordinate_update_beta(st0, pr, 0) == 0.0


def test_beta_update_degenerate_column():
    x = np.zeros((3, 1))
    pr = FgsProblem(x, np.ones(3))
    st0 = FgsState.initial([0.2], pr.tau)
    with pytest.warns(DegenerateCoordinateWarning):
        assert coordinate_update_beta(st0, pr, 0) == 0.0


def random_state(rng, pr):
    beta = rng.normal(scale=0.3, size=pr.p)
    st0 = FgsState.initial(beta, pr.tau, nn=pr.nn, nu=float(rng.uniform(0.5, 5)))
    slack = np.triu(st0.slack + rng.normal(scale=0.1, size=st0.slack.shape), 1)
    mult = np.triu(rng.normal(size=st0.slack.shape), 1)
    return FgsState(beta, slack, mult, st0.nu, st0.set_f, st0.set_e_active, st0.set_n)


def with_beta(state, l, val):
    b = state.beta.copy()
    b[l] = val
    return FgsState(b, state.slack, state.multipliers, state.nu,
                    state.set_f, state.set_e_active, state.set_n)


def with_slack(state, pair, val):
    s = state.slack.copy()
    s[pair] = val
    return FgsState(state.beta, s, state.multipliers, state.nu,
                    state.set_f, state.set_e_active, state.set_n)


def test_beta_update_minimizes_lagrangian():
    # the update must beat a dense 1-D scan of L in that coordinate
    rng = np.random.default_rng(4)
    for _ in range(30):
        pr = random_problem(rng, p=int(rng.integers(2, 5)), tau=0.8)
        state = random_state(rng, pr)
        l = int(rng.integers(pr.p))
        new = coordinate_update_beta(state, pr, l)
        l_new = augmented_lagrangian(pr, with_beta(state, l, new))
        assert l_new <= augmented_lagrangian(pr, state) + 1e-10
        scan = np.linspace(new - 1, new + 1, 2001)
        assert l_new <= min(augmented_lagrangian(pr, with_beta(state, l, b)) for b in scan) + 1e-9


def test_slack_update_examples():
    pr = FgsProblem(np.eye(2), np.zeros(2), lam2=0.7, tau=0.7)
    st0 = FgsState.initial([0.4, 0.4], pr.tau)
    assert coordinate_update_slack(st0, pr, (0, 1)) == 0.0

    st1 = FgsState(np.array([0.5, 0.0]), np.zeros((2, 2)), np.array([[0.0, 1.0], [0.0, 0.0]]),
                   2.0, np.zeros(2, bool), np.array([[False, True], [False, False]]), np.zeros(2, bool))
    pr1 = FgsProblem(np.eye(2), np.zeros(2), lam2=1.0, tau=1.0)
    assert coordinate_update_slack(st1, pr1, (0, 1)) == pytest.approx(0.5)


def test_slack_update_inactive_pair_untouched():
    pr = FgsProblem(np.eye(2), np.zeros(2), lam2=1.0, tau=0.05)
    st0 = FgsState.initial([1.0, 0.0], pr.tau)
    st0 = with_slack(st0, (0, 1), 0.123456789)
    assert not st0.set_e_active[0, 1]
    assert coordinate_update_slack(st0, pr, (0, 1)) == 0.123456789


def test_slack_update_minimizes_lagrangian():
    rng = np.random.default_rng(5)
    for _ in range(30):
        pr = random_problem(rng, p=int(rng.integers(2, 5)), tau=2.0)
        state = random_state(rng, pr)
        pairs = list(zip(*np.nonzero(state.set_e_active)))
        pair = pairs[int(rng.integers(len(pairs)))]
        new = coordinate_update_slack(state, pr, pair)
        l_new = augmented_lagrangian(pr, with_slack(state, pair, new))
        assert l_new <= augmented_lagrangian(pr, state) + 1e-10
        scan = np.linspace(new - 1, new + 1, 2001)
        assert l_new <= min(augmented_lagrangian(pr, with_slack(state, pair, s)) for s in scan) + 1e-9


def test_multiplier_updates():
    ctl = SolverControls()
    st0 = FgsState.initial([0.1, 0.12, 0.5], 0.05)
    st1 = update_multipliers(st0, ctl)
    assert np.array_equal(st1.multipliers, st0.multipliers)
    assert st1.nu == pytest.approx(1.05)

    st2 = with_slack(st0, (0, 1), -0.02 - 0.3)
    assert update_multipliers(st2, ctl).multipliers[0, 1] == pytest.approx(0.3)

    s = st0
    for _ in range(10):
        s = update_multipliers(s, ctl)
    assert abs(s.nu - 1.05 ** 10) < 1e-12


def test_kernel_matches_python_updates():
    # one inner iteration of the compiled loop equals the reference sequence
    rng = np.random.default_rng(6)
    for _ in range(20):
        pr = random_problem(rng, p=int(rng.integers(2, 7)), tau=0.6, lam3=0.5)
        state = random_state(rng, pr)
        ctl = SolverControls()
        ref = update_multipliers(state, ctl)
        for l in range(pr.p):
            ref = with_beta(ref, l, coordinate_update_beta(ref, pr, l))
        for a, b in zip(*np.nonzero(ref.set_e_active)):
            ref = with_slack(ref, (a, b), coordinate_update_slack(ref, pr, (a, b)))

        beta, slack, mult = state.beta.copy(), state.slack.copy(), state.multipliers.copy()
        _inner_loop(pr.gram, pr.xty, beta, slack, mult, state.set_e_active, state.set_f,
                    state.set_n, state.nu, ctl.rho, pr.lam, pr.lam3, pr.lam1 / pr.tau,
                    pr.lam2 / pr.tau, 1e300, 1, True)
        assert np.allclose(beta, ref.beta, rtol=1e-10, atol=1e-12)
        assert np.allclose(slack, ref.slack, rtol=1e-10, atol=1e-12)
        assert np.allclose(mult, ref.multipliers, rtol=1e-10, atol=1e-12)


# solve

def test_solve_ridge():
    rng = np.random.default_rng(7)
    x = rng.normal(size=(30, 6))
    y = rng.normal(size=30)
    pr = FgsProblem(x, y, lam=0.4, lam2=0.0)
    expect = np.linalg.solve(x.T @ x + 0.4 * np.eye(6), x.T @ y)
    sol = solve(pr, SolverControls(delta_star=1e-10), beta_init=np.zeros(6))
    assert np.abs(sol.beta - expect).max() < 1e-6


def test_solve_ridge_fixed_point():
    rng = np.random.default_rng(8)
    pr = FgsProblem(rng.normal(size=(20, 4)), rng.normal(size=20), lam=0.1, lam2=0.0)
    sol = solve(pr, beta_init=ridge_solution(pr))
    assert sol.inner_iterations[0] == 1


def test_solve_zero_response():
    pr = FgsProblem(np.random.default_rng(9).normal(size=(8, 3)), np.zeros(8),
                    lam=0.1, lam1=0.5, lam2=0.5, tau=0.2, lam3=0.3)
    sol = solve(pr)
    assert np.all(sol.beta == 0.0)
    assert sol.objective_trace[-1] == 0.0


def grid_minimizer(pr):
    best = None
    for b in itertools.product(GRID, repeat=3):
        val = objective(pr, np.array(b))
        if best is None or val < best[0]:
            best = (val, np.array(b))
    return best


def test_solve_grid_oracle():
    rng = np.random.default_rng(10)
    for _ in range(3):
        pr = random_problem(rng, n=12, p=3)
        gmin, gbeta = grid_minimizer(pr)
        assert solve(pr, beta_init=gbeta).objective_trace[-1] <= gmin + 1e-3


def test_solve_divergence_reports_indices():
    # 2 * 1e308 overflows inside the sweep
    pr = FgsProblem.from_gram(np.array([[1e308]]), np.array([1e308]), 1.0)
    with pytest.raises(DivergenceError, match=r"outer iteration 1, inner iteration 1"):
        solve(pr, beta_init=np.zeros(1))


def test_solve_bad_init():
    pr = FgsProblem(np.ones((3, 2)), np.ones(3))
    with pytest.raises(InvalidInputError):
        solve(pr, beta_init=[np.nan, 0.0])


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_monotone_trace_and_no_worse_than_init(seed):
    rng = np.random.default_rng(seed)
    pr = random_problem(rng)
    init = rng.normal(scale=0.5, size=pr.p)
    sol = solve(pr, beta_init=init)
    tr = sol.objective_trace
    assert all(b <= a + 1e-10 for a, b in zip(tr, tr[1:]))
    assert objective(pr, sol.beta) <= objective(pr, init) + 1e-10
    assert tr[-1] == pytest.approx(objective(pr, sol.beta), abs=1e-9)


def test_nn_negative_mass_decreases_in_lam3():
    rng = np.random.default_rng(11)
    x = rng.normal(size=(40, 6))
    y = x @ np.array([1.0, -0.8, 0.5, -0.3, 0.0, 0.2]) + 0.1 * rng.normal(size=40)
    mass = []
    for lam3 in (0.0, 1.0, 10.0, 100.0):
        pr = FgsProblem(x, y, lam=0.1, lam3=lam3)
        beta = solve(pr, SolverControls(delta_star=1e-9)).beta
        mass.append(float(np.sum(np.minimum(beta, 0.0) ** 2)))
    assert all(b <= a + 1e-12 for a, b in zip(mass, mass[1:]))
    assert mass[-1] < 0.1 * mass[0]


def test_solve_groups_equal_coefficients():
    # identical columns with a grouping penalty end up with one shared value
    rng = np.random.default_rng(12)
    z = rng.normal(size=(50, 1))
    x = np.hstack([z, z + 1e-3 * rng.normal(size=(50, 1)), rng.normal(size=(50, 1))])
    y = 2 * z[:, 0] + 0.5 * x[:, 2]
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        beta = solve(FgsProblem(x, y, lam=0.1, lam2=1.0, tau=0.5)).beta
    assert abs(beta[0] - beta[1]) < 1e-4
    assert abs(beta[0] - beta[2]) > 0.1
