import dataclasses

import numpy as np
import pytest

from src.config import SolverConfig
from src.errors import ConfigurationError, InfeasibleProblemError
from src.linops import dense, identity, zero
from src.oracle import oracle_basis_pursuit_tiny, oracle_project_l1, oracle_solve_tiny
from src.prox import l1_norm_prox, project_l1_ball
from src.solvers import (
    PenaltyKind,
    ProblemSpec,
    objective,
    resolve_step_sizes,
    solve_basis_pursuit,
    solve_cista,
    solve_constrained_gist,
    solve_gist,
    solve_ista,
    solve_l1_constrained,
)


def test_basis_pursuit_two_unknowns(tight_config):
    report = solve_basis_pursuit(dense([[1.0, 2.0]]), np.array([2.0]), tight_config)

    assert report.converged
    np.testing.assert_allclose(report.x, [0.0, 1.0], atol=1e-7)


def test_basis_pursuit_matches_enumeration(rng, tight_config):
    x_true = np.zeros(8)
    x_true[[1, 5]] = [1.5, -2.0]
    B = dense(rng.standard_normal((4, 8)))
    b = B.matvec(x_true)

    report = solve_basis_pursuit(B, b, tight_config)
    oracle = oracle_basis_pursuit_tiny(B, b)

    assert oracle.kkt_ok
    np.testing.assert_allclose(report.x, oracle.x, atol=1e-6)
    np.testing.assert_allclose(B.matvec(report.x), b, atol=1e-8)
    assert np.abs(report.x).sum() == pytest.approx(oracle.objective, rel=1e-7)


@pytest.mark.parametrize("seed", range(10))
def test_basis_pursuit_recovers_sparse_vector_from_gaussian_measurements(seed):
    rng = np.random.default_rng(seed)
    B = dense(rng.standard_normal((15, 40)) / np.sqrt(15))
    x_true = np.zeros(40)
    x_true[rng.choice(40, 3, replace=False)] = rng.standard_normal(3)

    report = solve_basis_pursuit(B, B.matvec(x_true), SolverConfig(max_iter=50_000, rel_tol=1e-14))

    assert report.iterations_run <= 50_000
    assert np.linalg.norm(report.x - x_true) < 1e-6


@pytest.mark.parametrize("lam", [0.5, 1.0, 4.0])
def test_basis_pursuit_limit_does_not_depend_on_internal_lambda(tight_config, lam):
    report = solve_basis_pursuit(dense([[1.0, 2.0, -1.0]]), np.array([3.0]), tight_config, lam=lam)

    np.testing.assert_allclose(report.x, [0.0, 1.5, 0.0], atol=1e-6)


def test_basis_pursuit_rejects_nonpositive_lambda():
    with pytest.raises(ConfigurationError):
        solve_basis_pursuit(dense([[1.0]]), np.array([1.0]), lam=0.0)


def test_basis_pursuit_rejects_infeasible_system():
    with pytest.raises(InfeasibleProblemError):
        solve_basis_pursuit(dense([[1.0, 1.0], [1.0, 1.0]]), np.array([1.0, 2.0]))


def test_l1_constrained_with_identity_data_map_is_projection(rng, tight_config):
    y = rng.standard_normal(6) * 2
    radius = 1.5

    report = solve_l1_constrained(dense(np.eye(6)), y, None, None, radius, tight_config)

    np.testing.assert_allclose(report.x, project_l1_ball(y, radius), atol=1e-8)
    np.testing.assert_allclose(report.x, oracle_project_l1(y, radius), atol=1e-8)


def test_l1_constrained_with_equality_constraint(rng, tight_config):
    K = dense(rng.standard_normal((6, 4)))
    y = rng.standard_normal(6)
    B = dense([[1.0, 1.0, 1.0, 1.0]])
    b = np.array([0.5])
    radius = 1.0

    report = solve_l1_constrained(K, y, B, b, radius, tight_config)

    assert report.converged
    assert np.abs(report.x).sum() <= radius + 1e-8
    np.testing.assert_allclose(B.matvec(report.x), b, atol=1e-8)
    assert report.solver == "l1-constrained"


def test_l1_constrained_with_large_radius_is_least_squares(rng, tight_config):
    K = rng.standard_normal((6, 3))
    y = rng.standard_normal(6)
    expected, *_ = np.linalg.lstsq(K, y, rcond=None)

    report = solve_l1_constrained(dense(K), y, None, None, 100.0, tight_config)

    np.testing.assert_allclose(report.x, expected, atol=1e-7)


def test_l1_ball_penalty_value_is_an_indicator():
    penalty = PenaltyKind.l1_ball(1.0)

    assert penalty.value(np.array([0.5, -0.5]), 0.0) == 0.0
    assert penalty.value(np.array([1.0, -0.5]), 0.0) == float("inf")
    assert penalty.label == "l1-ball:1"
    with pytest.raises(ConfigurationError):
        PenaltyKind.l1_ball(-1.0)


def test_oracle_limits_problem_size(rng):
    problem = ProblemSpec(K=dense(rng.standard_normal((3, 7))), y=np.ones(3), lam=0.1)

    with pytest.raises(ConfigurationError):
        oracle_solve_tiny(problem)


def test_oracle_rejects_joint_penalty():
    problem = ProblemSpec(K=identity(2), y=np.ones(2), lam=0.1, penalty=PenaltyKind.joint(2))

    with pytest.raises(ConfigurationError):
        oracle_solve_tiny(problem)


def test_oracle_solution_of_identity_problem_is_soft_threshold():
    problem = ProblemSpec(K=identity(3), y=np.array([2.0, 0.2, -1.0]), lam=0.5)

    oracle = oracle_solve_tiny(problem)

    np.testing.assert_allclose(oracle.x, [1.5, 0.0, -0.5])
    assert oracle.active_signs == (1, 0, -1)
    assert oracle.kkt_ok


def test_oracle_bisection_projection_inside_ball():
    z = np.array([0.1, -0.2])

    np.testing.assert_array_equal(oracle_project_l1(z, 1.0), z)
    with pytest.raises(ConfigurationError):
        oracle_project_l1(z, -1.0)


@pytest.mark.parametrize("solve", [solve_cista, solve_constrained_gist])
def test_generic_l1_prox_reproduces_separable_penalty(rng, tight_config, solve):
    B = dense(rng.standard_normal((2, 5)))
    separable = ProblemSpec(
        K=dense(rng.standard_normal((7, 5))),
        y=rng.standard_normal(7),
        lam=0.4,
        B=B,
        b=B.matvec(rng.standard_normal(5)),
    )
    generic = dataclasses.replace(separable, penalty=PenaltyKind.generic(l1_norm_prox(1.0)))
    config = tight_config.with_overrides(max_iter=200, rel_tol=0.0)
    separable_states, generic_states = [], []

    solve(separable, config, callback=separable_states.append)
    solve(generic, config, callback=generic_states.append)
    report = solve(generic, tight_config)

    for left, right in zip(separable_states, generic_states):
        np.testing.assert_allclose(right.x, left.x, atol=1e-12, rtol=0)
        np.testing.assert_allclose(right.w, left.w, atol=1e-12, rtol=0)
        np.testing.assert_allclose(right.v, left.v, atol=1e-12, rtol=0)
    assert report.converged
    assert max(report.kkt_residuals) < 1e-7
    assert report.final_objective == pytest.approx(objective(separable, report.x), rel=1e-12)


def _general_penalty_pair(rng):
    n = 5
    problem = ProblemSpec(
        K=dense(rng.standard_normal((7, n))),
        y=rng.standard_normal(7),
        lam=0.3,
        A=dense(rng.standard_normal((3, n))),
    )
    zero_constraint = dataclasses.replace(problem, B=zero(2, n), b=np.zeros(2))
    return (
        problem,
        lambda config, callback: solve_constrained_gist(zero_constraint, config, callback=callback),
        lambda config, callback: solve_gist(problem, config, callback=callback),
    )


def _unconstrained_identity_pair(rng):
    problem = ProblemSpec(K=dense(rng.standard_normal((7, 5))), y=rng.standard_normal(7), lam=0.3)
    return (
        problem,
        lambda config, callback: solve_gist(problem, config, callback=callback),
        lambda config, callback: solve_ista(problem, config, callback=callback),
    )


def _constrained_identity_pair(rng):
    B = dense(rng.standard_normal((2, 5)))
    problem = ProblemSpec(
        K=dense(rng.standard_normal((7, 5))),
        y=rng.standard_normal(7),
        lam=0.3,
        B=B,
        b=B.matvec(rng.standard_normal(5)),
    )
    return (
        problem,
        lambda config, callback: solve_constrained_gist(problem, config, callback=callback),
        lambda config, callback: solve_cista(problem, config, callback=callback),
    )


def _zero_data_map_pair(rng):
    n = 8
    x_true = np.zeros(n)
    x_true[rng.choice(n, 2, replace=False)] = rng.standard_normal(2)
    B = dense(rng.standard_normal((4, n)))
    b = B.matvec(x_true)
    problem = ProblemSpec(K=zero(1, n), y=np.zeros(1), lam=0.7, B=B, b=b)
    return (
        problem,
        lambda config, callback: solve_constrained_gist(problem, config, callback=callback),
        lambda config, callback: solve_basis_pursuit(B, b, config, lam=0.7, callback=callback),
    )


@pytest.mark.parametrize(
    "build_pair",
    [_general_penalty_pair, _unconstrained_identity_pair, _constrained_identity_pair,
     _zero_data_map_pair],
    ids=["zero-constraint", "identity-penalty", "identity-penalty-constrained", "zero-data-map"],
)
@pytest.mark.parametrize("seed", range(20))
def test_specializations_agree_iterate_for_iterate(build_pair, seed):
    problem, general, special = build_pair(np.random.default_rng(seed))
    steps = resolve_step_sizes(problem, SolverConfig())
    # Both runs get the same pinned τ's
    config = SolverConfig(
        max_iter=50, rel_tol=0.0, tau1=steps.tau1, tau2=steps.tau2, tau3=steps.tau3
    )
    general_states, special_states = [], []

    general(config, general_states.append)
    special(config, special_states.append)

    assert len(general_states) == len(special_states) == 50
    for left, right in zip(general_states, special_states):
        np.testing.assert_allclose(left.x, right.x, atol=1e-12, rtol=0)
        np.testing.assert_allclose(left.w, right.w, atol=1e-12, rtol=0)
        if left.v.shape == right.v.shape:
            np.testing.assert_allclose(left.v, right.v, atol=1e-12, rtol=0)
