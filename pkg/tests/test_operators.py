import numpy as np
import pytest

from quotient_regularization.errors import ArgumentError, DimensionError, NumericError
from quotient_regularization.gradient import grad, grad_adjoint, laplacian_symbol
from quotient_regularization.operator_dense import DenseOperator
from quotient_regularization.operator_fourier import RadialFourierOperator, radial_mask, symmetrize_mask


def test_dense_identity():
    op = DenseOperator(np.eye(2))
    np.testing.assert_array_equal(op.apply(np.array([1.0, 2.0])), [1.0, 2.0])
    np.testing.assert_array_equal(op.apply_adjoint(np.array([1.0, 2.0])), [1.0, 2.0])


def test_dense_matches_triple_loop(rng):
    matrix = rng.standard_normal((5, 8))
    u = rng.standard_normal(8)
    expected = [sum(matrix[i, j] * u[j] for j in range(8)) for i in range(5)]
    np.testing.assert_allclose(DenseOperator(matrix).apply(u), expected, atol=1e-13)


def test_dense_rejects_bad_input():
    with pytest.raises(DimensionError):
        DenseOperator(np.zeros((0, 3)))
    with pytest.raises(DimensionError):
        DenseOperator(np.array([[np.nan, 1.0]]))
    with pytest.raises(DimensionError):
        DenseOperator(np.eye(3)).apply(np.ones(2))


def test_dense_factor_is_cached(rng):
    op = DenseOperator(rng.standard_normal((4, 6)))
    first = op.factor(2.0, 0.5)
    assert op.factor(2.0, 0.5) is first
    assert op.factor(1.0, 0.5) is not first


def test_dense_factor_failure_is_numeric_error(mocker):
    op = DenseOperator(np.eye(2))
    mocker.patch("scipy.linalg.cho_factor", side_effect=np.linalg.LinAlgError("not positive definite"))
    with pytest.raises(NumericError):
        op.factor(1.0, 1.0)


def test_adjoint_identity_dense_and_fourier(rng):
    dense = DenseOperator(rng.standard_normal((6, 9)))
    fourier = RadialFourierOperator.from_lines(12, 10, 4)
    for _ in range(100):
        u, r = rng.standard_normal(9), rng.standard_normal(6)
        lhs, rhs = dense.inner(dense.apply(u), r), dense.inner(u, dense.apply_adjoint(r))
        assert lhs == pytest.approx(rhs, rel=1e-11, abs=1e-11)

        u = rng.standard_normal((12, 10))
        r = rng.standard_normal(fourier.output_shape) + 1j * rng.standard_normal(fourier.output_shape)
        lhs, rhs = fourier.inner(fourier.apply(u), r), fourier.inner(u, fourier.apply_adjoint(r))
        assert lhs == pytest.approx(rhs, rel=1e-11, abs=1e-11)


def test_full_mask_is_orthonormal(rng):
    op = RadialFourierOperator(np.ones((8, 6), dtype=bool))
    u = rng.standard_normal((8, 6))
    assert np.linalg.norm(op.apply(u)) == pytest.approx(np.linalg.norm(u), rel=1e-12)
    np.testing.assert_allclose(op.apply_adjoint(op.apply(u)), u, atol=1e-12)


def test_single_line_mask():
    mask = radial_mask(32, 32, 1)
    assert mask[0, 0]
    # one horizontal diameter through DC
    assert mask.sum() == 32
    assert mask[0].all()


def test_mask_is_symmetric_and_bounded():
    for n_lines in (3, 10, 64):
        mask = radial_mask(64, 64, n_lines)
        np.testing.assert_array_equal(mask, symmetrize_mask(mask))
        assert 0.0 < mask.mean() <= 1.0


def test_mask_is_deterministic():
    np.testing.assert_array_equal(radial_mask(256, 256, 10), radial_mask(256, 256, 10))


def test_fourier_operator_requirements():
    mask = np.zeros((4, 4), dtype=bool)
    mask[1, 1] = True
    with pytest.raises(ArgumentError):
        RadialFourierOperator(mask)
    mask[0, 0] = True
    with pytest.raises(ArgumentError):
        RadialFourierOperator(mask)
    with pytest.raises(ArgumentError):
        radial_mask(16, 16, 0)


def test_spectral_denominator():
    op = RadialFourierOperator.from_lines(8, 8, 3)
    denominator = op.spectral_denominator(rho=2.0, beta=0.5, lam=3.0)
    assert np.all(denominator >= 0.5)
    assert denominator[0, 0] == pytest.approx(3.0 + 0.5)


def test_grad_example():
    g = grad(np.array([[0.0, 1.0], [0.0, 1.0]]))
    np.testing.assert_array_equal(g[0], [[1.0, -1.0], [1.0, -1.0]])
    np.testing.assert_array_equal(g[1], np.zeros((2, 2)))


def test_grad_of_constant_is_zero():
    assert not np.any(grad(np.full((5, 4), 2.5)))


def test_grad_adjoint(rng):
    u = rng.standard_normal((7, 5))
    g = rng.standard_normal((2, 7, 5))
    assert float(np.vdot(grad(u), g)) == pytest.approx(float(np.vdot(u, grad_adjoint(g))), abs=1e-13)


def test_grad_shape_checks():
    with pytest.raises(DimensionError):
        grad(np.ones(4))
    with pytest.raises(DimensionError):
        grad(np.ones((1, 4)))
    with pytest.raises(DimensionError):
        grad_adjoint(np.ones((3, 4, 4)))


def test_laplacian_symbol_diagonalizes_dtd(rng):
    u = rng.standard_normal((6, 9))
    via_fft = np.fft.ifft2(np.fft.fft2(u) * laplacian_symbol(6, 9)).real
    np.testing.assert_allclose(via_fft, grad_adjoint(grad(u)), atol=1e-12)
