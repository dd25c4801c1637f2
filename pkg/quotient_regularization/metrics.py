import math

import numpy as np
import scipy.linalg

from quotient_regularization.errors import ArgumentError, DimensionError, NumericError
from quotient_regularization.operator_dense import DenseOperator

# PSNR written to CSV in place of +inf
PSNR_CAP = 200.0


def _check_shapes(a: np.ndarray, b: np.ndarray) -> None:
    if np.shape(a) != np.shape(b):
        raise DimensionError(f"shape mismatch: {np.shape(a)} vs {np.shape(b)}")


def mse(u_hat: np.ndarray, u_true: np.ndarray) -> float:
    """Sum of squared errors ||u_hat - u_true||^2 (not divided by n)."""
    _check_shapes(u_hat, u_true)
    return float(np.sum((np.asarray(u_hat) - np.asarray(u_true)) ** 2))


def oracle_mse(operator: DenseOperator, support: np.ndarray, sigma: float) -> float:
    """sigma^2 * tr((A_S^T A_S)^-1), the expected error of least squares on the true support S."""
    support = np.asarray(support)
    if support.size == 0:
        raise ArgumentError("oracle MSE needs a nonempty support")
    columns = operator.columns(support)
    if np.linalg.matrix_rank(columns) < columns.shape[1]:
        raise NumericError(f"A restricted to the support ({columns.shape[0]}x{columns.shape[1]}) is rank deficient")
    gram = columns.T @ columns
    try:
        factor = scipy.linalg.cho_factor(gram, lower=True)
    except np.linalg.LinAlgError as e:
        raise NumericError(f"Gram matrix of the support columns is not positive definite: {e}") from e
    inverse = scipy.linalg.cho_solve(factor, np.eye(gram.shape[0]))
    return sigma**2 * float(np.trace(inverse))


def re_psnr(u_star: np.ndarray, u_true: np.ndarray) -> tuple[float, float]:
    """
    Relative error ||u* - u||/||u|| and PSNR 10 log10(N P^2 / ||u* - u||^2), P = max(u).
    PSNR is +inf at zero error. A reference without a positive entry has no peak and is rejected.
    """
    _check_shapes(u_star, u_true)
    true_norm = float(np.linalg.norm(u_true))
    if true_norm == 0.0:
        raise ArgumentError("reference image must not be zero")
    peak = float(np.max(u_true))
    if peak <= 0.0:
        raise ArgumentError(f"PSNR needs a reference with a positive maximum, got max {peak}")
    err = float(np.sum((np.asarray(u_star) - np.asarray(u_true)) ** 2))
    re = math.sqrt(err) / true_norm
    if err == 0.0:
        return re, math.inf
    return re, 10.0 * math.log10(np.size(u_true) * peak**2 / err)


def capped_psnr(psnr: float) -> float:
    return min(psnr, PSNR_CAP)
