from __future__ import annotations

import logging

import numpy as np
import scipy.fft

from quotient_regularization.errors import ArgumentError, DimensionError
from quotient_regularization.gradient import check_image, laplacian_symbol
from quotient_regularization.operator_abstract import AbstractOperator

logger = logging.getLogger(__name__)


def radial_mask(height: int, width: int, n_lines: int) -> np.ndarray:
    """Boolean k-space mask of n_lines equiangular lines through the zero frequency.

    Lines are at angles pi*i/n_lines. Each line is rasterized with one sample per
    integer radius step by rounding to the nearest grid point in centered
    coordinates. The returned mask is in unshifted FFT order, symmetric under
    frequency negation, and always contains DC.
    """
    if n_lines < 1:
        raise ArgumentError(f"n_lines must be at least 1, got {n_lines}")
    if height < 2 or width < 2:
        raise DimensionError(f"mask must be at least 2x2, got {height}x{width}")

    centered = np.zeros((height, width), dtype=bool)
    cy, cx = height // 2, width // 2
    radius = max(height, width) // 2
    r = np.arange(-radius, radius + 1, dtype=np.float64)
    for i in range(n_lines):
        theta = np.pi * i / n_lines
        rows = cy + np.rint(r * np.sin(theta)).astype(int)
        cols = cx + np.rint(r * np.cos(theta)).astype(int)
        inside = (rows >= 0) & (rows < height) & (cols >= 0) & (cols < width)
        centered[rows[inside], cols[inside]] = True

    mask = np.fft.ifftshift(centered)
    mask = symmetrize_mask(mask)
    mask[0, 0] = True
    return mask


def symmetrize_mask(mask: np.ndarray) -> np.ndarray:
    """Union of the mask with its image under k -> -k (mod the grid)."""
    height, width = mask.shape
    neg_rows = (-np.arange(height)) % height
    neg_cols = (-np.arange(width)) % width
    return mask | mask[np.ix_(neg_rows, neg_cols)]


class RadialFourierOperator(AbstractOperator):
    """
    Masked orthonormal 2-D Fourier transform: A u = (F u)[mask].

    Measurements are the complex sampled coefficients, flattened in row-major
    order of the mask. The adjoint zero-fills, applies the inverse orthonormal
    FFT and keeps the real part.
    """

    def __init__(self, mask: np.ndarray, n_lines: int | None = None):
        mask = np.asarray(mask, dtype=bool)
        check_image(mask)
        if not mask[0, 0]:
            raise ArgumentError("k-space mask must sample the DC frequency")
        if not np.array_equal(mask, symmetrize_mask(mask)):
            raise ArgumentError("k-space mask must be symmetric under frequency negation")
        self.mask = mask
        self.n_lines = n_lines
        self.input_shape = mask.shape
        self.output_shape = (int(mask.sum()),)

    @classmethod
    def from_lines(cls, height: int, width: int, n_lines: int) -> RadialFourierOperator:
        op = cls(radial_mask(height, width, n_lines), n_lines=n_lines)
        logger.debug(f"[fourier-operator] {n_lines} radial lines on {height}x{width}, sampling fraction {op.sampling_fraction:.4f}")
        return op

    @property
    def sampling_fraction(self) -> float:
        return float(self.mask.mean())

    def apply(self, u: np.ndarray) -> np.ndarray:
        self.check_input(u)
        return scipy.fft.fft2(u, norm="ortho")[self.mask]

    def apply_adjoint(self, r: np.ndarray) -> np.ndarray:
        self.check_output(r)
        full = np.zeros(self.mask.shape, dtype=np.complex128)
        full[self.mask] = r
        return scipy.fft.ifft2(full, norm="ortho").real

    def spectral_denominator(self, rho: float, beta: float, lam: float) -> np.ndarray:
        """Fourier diagonal of (lam A^T A + rho D^T D + beta I)."""
        height, width = self.mask.shape
        return lam * self.mask.astype(np.float64) + rho * laplacian_symbol(height, width) + beta

    @staticmethod
    def spectral_solve(denominator: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Solves the diagonalized system for a real right-hand side b."""
        return scipy.fft.ifft2(scipy.fft.fft2(b) / denominator).real
