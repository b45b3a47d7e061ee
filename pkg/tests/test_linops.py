import numpy as np
import pytest

from src.errors import DimensionMismatchError, SparseRecoveryError
from src.linops import (
    MapKind,
    adjoint_apply,
    apply,
    as_vector,
    compose,
    dense,
    estimate_sq_norm,
    forward_difference,
    from_callbacks,
    gram_combination_sq_norm,
    identity,
    is_identity,
    scale,
    stack,
    to_dense,
    zero,
)


def _adjoint_gap(op, rng):
    x = rng.standard_normal(op.cols)
    y = rng.standard_normal(op.rows)
    return abs(op.matvec(x) @ y - x @ op.rmatvec(y))


def test_dense_map_applies_matrix_and_transpose():
    op = dense([[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]])

    assert op.shape == (3, 2)
    assert op.kind is MapKind.DENSE
    np.testing.assert_allclose(apply(op, [1.0, -1.0]), [-1.0, -1.0, -1.0])
    np.testing.assert_allclose(adjoint_apply(op, [1.0, 0.0, 1.0]), [6.0, 8.0])


def test_dense_map_is_read_only():
    source = np.eye(2)
    op = dense(source)
    source[0, 0] = 5.0

    assert op.matrix[0, 0] == 1.0
    with pytest.raises(ValueError):
        op.matrix[0, 0] = 2.0


def test_identity_and_zero_maps():
    x = np.array([1.0, -2.0, 3.0])

    np.testing.assert_array_equal(identity(3).matvec(x), x)
    assert is_identity(identity(3))
    assert not is_identity(dense(np.eye(3)))
    np.testing.assert_array_equal(zero(2, 3).matvec(x), np.zeros(2))
    np.testing.assert_array_equal(zero(2, 3).rmatvec(np.ones(2)), np.zeros(3))


def test_composition_scaling_and_stacking_keep_adjoints(rng):
    outer = dense(rng.standard_normal((4, 3)))
    inner = dense(rng.standard_normal((3, 5)))
    other = dense(rng.standard_normal((2, 5)))

    for op in (compose(outer, inner), scale(inner, -2.5), stack(inner, other)):
        assert _adjoint_gap(op, rng) < 1e-12

    stacked = stack(inner, other)
    assert stacked.shape == (5, 5)
    np.testing.assert_allclose(
        to_dense(stacked), np.vstack([inner.matrix, other.matrix]), atol=1e-14
    )


def test_mismatched_operand_sizes_are_rejected():
    op = dense(np.ones((2, 3)))

    with pytest.raises(DimensionMismatchError) as exc_info:
        op.matvec(np.ones(4))
    assert exc_info.value.expected == 3
    assert exc_info.value.actual == 4

    with pytest.raises(DimensionMismatchError):
        compose(op, dense(np.ones((4, 2))))
    with pytest.raises(DimensionMismatchError):
        stack(op, dense(np.ones((2, 2))))


def test_callback_map_checks_output_shape():
    op = from_callbacks(2, 3, lambda x: x[:2], lambda y: np.concatenate([y, [0.0]]), name="crop")

    np.testing.assert_array_equal(op.matvec(np.array([1.0, 2.0, 3.0])), [1.0, 2.0])
    assert "crop" in repr(op)

    broken = from_callbacks(2, 3, lambda x: x, lambda y: y, name="broken")
    with pytest.raises(DimensionMismatchError):
        broken.matvec(np.ones(3))


def test_from_callbacks_requires_both_directions():
    with pytest.raises(SparseRecoveryError):
        from_callbacks(2, 2, lambda x: x, None)


def test_forward_difference_matrix():
    np.testing.assert_array_equal(
        forward_difference(3).matrix, [[-1.0, 1.0, 0.0], [0.0, -1.0, 1.0]]
    )
    with pytest.raises(SparseRecoveryError):
        forward_difference(1)


def test_to_dense_materializes_matrix_free_maps(rng):
    matrix = rng.standard_normal((3, 5))
    wide = from_callbacks(3, 5, lambda x: matrix @ x, lambda y: matrix.T @ y)
    tall = from_callbacks(5, 3, lambda x: matrix.T @ x, lambda y: matrix @ y)

    np.testing.assert_allclose(to_dense(wide), matrix)
    np.testing.assert_allclose(to_dense(tall), matrix.T)


@pytest.mark.parametrize("values", [[], [[1.0, 2.0]], [1.0, np.nan]])
def test_as_vector_rejects_bad_input(values):
    with pytest.raises(SparseRecoveryError):
        as_vector(values)


def test_as_vector_promotes_scalars():
    np.testing.assert_array_equal(as_vector(2.0), [2.0])


def test_estimate_sq_norm_matches_largest_singular_value(rng):
    matrix = rng.standard_normal((7, 4))
    estimate = estimate_sq_norm(dense(matrix), tol=1e-12)

    assert estimate.converged
    assert estimate.value == pytest.approx(np.linalg.norm(matrix, 2) ** 2, rel=1e-6)
    assert estimate.safe_value == pytest.approx(1.01 * estimate.value)


def test_estimate_sq_norm_of_zero_map():
    assert estimate_sq_norm(zero(2, 3)).value == 0.0


def test_gram_combination_norm(rng):
    K = rng.standard_normal((5, 4))
    B = rng.standard_normal((2, 4))
    expected = np.linalg.eigvalsh(0.5 * K.T @ K + B.T @ B).max()

    estimate = gram_combination_sq_norm(dense(K), dense(B), 0.5, 1.0, tol=1e-12)

    assert estimate.value == pytest.approx(expected, rel=1e-6)


def test_gram_combination_rejects_negative_weights():
    with pytest.raises(SparseRecoveryError):
        gram_combination_sq_norm(identity(2), None, -1.0, 1.0)
