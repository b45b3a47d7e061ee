import numpy as np
import pytest

from src.errors import ConfigurationError, SparseRecoveryError
from src.oracle import oracle_project_l1
from src.prox import (
    as_groups,
    from_groups,
    grouped_joint_threshold,
    joint_max_prox,
    joint_threshold,
    l1_ball_indicator_prox,
    l1_norm_prox,
    linf_ball_indicator_prox,
    moreau_complement,
    project_l1_ball,
    project_l1_rows,
    project_linf,
    soft_threshold,
    zero_prox,
)


def test_soft_threshold_shrinks_toward_zero():
    np.testing.assert_array_equal(soft_threshold([3.0, 0.5, -5.0], 1.0), [2.0, 0.0, -4.0])
    np.testing.assert_array_equal(soft_threshold([1.0, -1.0], 1.0), [0.0, 0.0])


def test_soft_threshold_plus_linf_projection_is_identity(rng):
    z = rng.standard_normal(50) * 3
    lam = 0.7

    np.testing.assert_allclose(soft_threshold(z, lam) + project_linf(z, lam), z, atol=1e-15)


def test_project_linf_clamps():
    np.testing.assert_array_equal(project_linf([3.0, -0.2, -4.0], 1.0), [1.0, -0.2, -1.0])


@pytest.mark.parametrize("op", [soft_threshold, project_linf, project_l1_ball])
def test_negative_threshold_is_rejected(op):
    with pytest.raises(SparseRecoveryError):
        op([1.0], -0.1)


def test_project_l1_ball_matches_bisection_oracle(rng):
    for _ in range(20):
        z = rng.standard_normal(8) * 2
        radius = float(rng.uniform(0.1, 3.0))

        projected = project_l1_ball(z, radius)

        np.testing.assert_allclose(projected, oracle_project_l1(z, radius), atol=1e-9)
        assert np.abs(projected).sum() <= radius + 1e-9


def test_project_l1_ball_keeps_interior_points():
    z = np.array([0.2, -0.3])

    np.testing.assert_array_equal(project_l1_ball(z, 1.0), z)
    np.testing.assert_array_equal(project_l1_ball(z, 0.0), [0.0, 0.0])


def test_joint_threshold_clips_the_largest_entries():
    np.testing.assert_allclose(joint_threshold([3.0, 1.0], 1.0), [2.0, 1.0])
    np.testing.assert_allclose(joint_threshold([3.0, -3.0, 1.0], 2.0), [2.0, -2.0, 1.0])


def test_joint_threshold_zeroes_small_rows():
    np.testing.assert_array_equal(joint_threshold([0.5, -0.4], 1.0), [0.0, 0.0])


def test_joint_threshold_is_moreau_complement_of_l1_projection(rng):
    for _ in range(20):
        z = rng.standard_normal(5) * 2
        lam = float(rng.uniform(0.1, 2.0))

        np.testing.assert_allclose(
            joint_threshold(z, lam) + project_l1_ball(z, lam), z, atol=1e-12
        )


def test_joint_threshold_with_zero_lambda_is_identity():
    np.testing.assert_array_equal(joint_threshold([1.0, -2.0], 0.0), [1.0, -2.0])


def test_grouped_operators_act_rowwise(rng):
    groups = rng.standard_normal((6, 3)) * 2
    lam = 0.8

    thresholded = grouped_joint_threshold(groups, lam)
    projected = project_l1_rows(groups, lam)

    for row, t_row, p_row in zip(groups, thresholded, projected):
        np.testing.assert_allclose(t_row, joint_threshold(row, lam), atol=1e-12)
        np.testing.assert_allclose(p_row, project_l1_ball(row, lam), atol=1e-12)


def test_grouped_operators_reject_ragged_input():
    with pytest.raises(SparseRecoveryError):
        grouped_joint_threshold([[1.0, 2.0], [3.0]], 1.0)
    with pytest.raises(SparseRecoveryError):
        project_l1_rows([1.0, 2.0], 1.0)


def test_group_layout_is_channel_major():
    u = np.array([1.0, 2.0, 3.0, 10.0, 20.0, 30.0])
    groups = as_groups(u, 2)

    np.testing.assert_array_equal(groups, [[1.0, 10.0], [2.0, 20.0], [3.0, 30.0]])
    np.testing.assert_array_equal(from_groups(groups), u)
    with pytest.raises(SparseRecoveryError):
        as_groups(np.ones(5), 2)


def test_prox_values_and_steps():
    z = np.array([3.0, -0.5])

    np.testing.assert_allclose(l1_norm_prox(2.0).evaluate(z, 0.5), [2.0, 0.0])
    assert l1_norm_prox(2.0).value(z) == pytest.approx(7.0)
    np.testing.assert_array_equal(zero_prox()(z), z)
    np.testing.assert_allclose(linf_ball_indicator_prox(1.0)(z), [1.0, -0.5])
    assert l1_ball_indicator_prox(1.0).value(z) == float("inf")
    with pytest.raises(ConfigurationError):
        zero_prox().evaluate(z, 0.0)


def test_moreau_complement_of_l1_is_linf_projection(rng):
    z = rng.standard_normal(10) * 3
    conjugate = moreau_complement(l1_norm_prox(1.0))

    np.testing.assert_allclose(conjugate(z), project_linf(z, 1.0), atol=1e-14)
    # Step s: conjugate of s·|.|_1 scaled is still the unit box
    np.testing.assert_allclose(conjugate.evaluate(z, 2.0), project_linf(z, 1.0), atol=1e-14)


def test_joint_max_prox_matches_grouped_threshold(rng):
    u = rng.standard_normal(8)
    prox = joint_max_prox(2, weight=0.5)

    expected = from_groups(grouped_joint_threshold(as_groups(u, 2), 0.5 * 0.4))
    np.testing.assert_allclose(prox.evaluate(u, 0.4), expected)
    assert prox.value(u) == pytest.approx(0.5 * np.abs(as_groups(u, 2)).max(axis=1).sum())


@pytest.mark.parametrize("step", [0.0, -1.0])
def test_prox_step_must_be_positive(step):
    with pytest.raises(ConfigurationError, match="prox step must be positive"):
        l1_norm_prox(1.0).evaluate(np.ones(3), step)


ROW_OPERATORS = [soft_threshold, project_linf, joint_threshold]


@pytest.mark.parametrize("op", ROW_OPERATORS)
def test_row_operators_are_nonexpansive(rng, op):
    for _ in range(200):
        size = int(rng.integers(1, 12))
        lam = float(rng.uniform(0.0, 3.0))
        z1 = rng.standard_normal(size) * 3
        z2 = rng.standard_normal(size) * 3

        gap = np.linalg.norm(op(z1, lam) - op(z2, lam))

        assert gap <= np.linalg.norm(z1 - z2) + 1e-12


@pytest.mark.parametrize("op", ROW_OPERATORS)
def test_row_operators_commute_with_permutations(rng, op):
    for _ in range(200):
        size = int(rng.integers(1, 12))
        lam = float(rng.uniform(0.0, 3.0))
        z = rng.standard_normal(size) * 3
        perm = rng.permutation(size)

        np.testing.assert_allclose(op(z[perm], lam), op(z, lam)[perm], atol=1e-14)
