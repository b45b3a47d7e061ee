import numpy as np
import pytest

from src.errors import ConfigurationError
from src.meg import WaveletTransform, lift_forward, lift_inverse
from src.meg.wavelets import SQRT2, max_levels


@pytest.mark.parametrize("length", [4, 8, 16, 32])
def test_lifting_pair_is_perfect_reconstruction(rng, length):
    x = rng.standard_normal((3, length))

    np.testing.assert_allclose(lift_inverse(lift_forward(x)), x, atol=1e-13)


def test_constant_signal_has_no_detail():
    coeffs = lift_forward(np.full(8, 2.0))

    np.testing.assert_allclose(coeffs[:4], 2.0 * SQRT2)
    np.testing.assert_allclose(coeffs[4:], 0.0, atol=1e-15)


def test_cubic_signal_has_no_interior_detail():
    k = np.arange(16, dtype=np.float64)
    coeffs = lift_forward(0.01 * k**3 - 0.2 * k**2 + k)
    detail = coeffs[8:]

    # d_k predicts x_{2k+1} from x_{2k-2} .. x_{2k+4}
    np.testing.assert_allclose(detail[1:6], 0.0, atol=1e-12)


def test_lifting_rejects_odd_or_short_signals():
    with pytest.raises(ConfigurationError):
        lift_forward(np.ones(7))
    with pytest.raises(ConfigurationError):
        lift_forward(np.ones(2))


def test_default_levels_keep_coarsest_block_four_wide():
    transform = WaveletTransform(32)

    assert max_levels(32) == 3
    assert transform.levels == 3
    assert transform.block_sizes == [32, 16, 8]
    assert transform.size == 2 * 6 * 32 * 32


@pytest.mark.parametrize("n_face, levels", [(8, 2), (16, 0), (16, 3), (12, None)])
def test_invalid_levels_or_sizes_are_rejected(n_face, levels):
    with pytest.raises(ConfigurationError):
        WaveletTransform(n_face, levels)


def test_transform_round_trip(rng):
    transform = WaveletTransform(16)
    field = rng.standard_normal(transform.size)

    np.testing.assert_allclose(transform.inverse(transform.forward(field)), field, atol=1e-12)


def test_constant_field_lives_in_the_coarsest_block():
    transform = WaveletTransform(16, levels=2)
    coeffs = transform.forward(np.ones(transform.size)).reshape(2, 6, 16, 16)

    np.testing.assert_allclose(coeffs[..., :4, :4], 2.0**2)
    coeffs[..., :4, :4] = 0.0
    np.testing.assert_allclose(coeffs, 0.0, atol=1e-13)


def test_inverse_adjoint_is_transpose_of_synthesis(rng):
    transform = WaveletTransform(8)
    coeffs = rng.standard_normal(transform.size)
    field = rng.standard_normal(transform.size)

    lhs = transform.inverse(coeffs) @ field
    rhs = coeffs @ transform.inverse_adjoint(field)

    assert lhs == pytest.approx(rhs, rel=1e-12)


def test_inverse_adjoint_acts_on_each_row_of_a_stack(rng):
    transform = WaveletTransform(8)
    rows = rng.standard_normal((3, transform.size))

    stacked = transform.inverse_adjoint(rows)

    for row, result in zip(rows, stacked):
        np.testing.assert_allclose(result, transform.inverse_adjoint(row), atol=1e-13)


def test_faces_and_channels_are_transformed_independently(rng):
    transform = WaveletTransform(8)
    field = np.zeros(transform.size)
    block = slice(3 * 64, 4 * 64)
    field[block] = rng.standard_normal(64)

    coeffs = transform.forward(field)

    assert np.count_nonzero(coeffs[: 3 * 64]) == 0
    assert np.count_nonzero(coeffs[4 * 64:]) == 0


def test_synthesis_map_wraps_inverse_and_adjoint(rng):
    transform = WaveletTransform(8)
    op = transform.synthesis_map()
    coeffs = rng.standard_normal(transform.size)

    assert op.shape == (transform.size, transform.size)
    np.testing.assert_allclose(op.matvec(coeffs), transform.inverse(coeffs))
    np.testing.assert_allclose(op.rmatvec(coeffs), transform.inverse_adjoint(coeffs))
