import logging
from threading import Lock

import numpy as np
import scipy.linalg

from quotient_regularization.errors import DimensionError, NumericError
from quotient_regularization.operator_abstract import AbstractOperator

logger = logging.getLogger(__name__)


class DenseOperator(AbstractOperator):
    """
    Dense m x n sensing matrix.

    Keeps a cache of Cholesky factors of (I + lam*kappa*A A^T), one per (lam, kappa) pair,
    so the Woodbury solve of the signal ADMM only pays for the m x m factorization once.
    """

    def __init__(self, matrix: np.ndarray):
        matrix = np.asarray(matrix, dtype=np.float64)
        if matrix.ndim != 2:
            raise DimensionError(f"sensing matrix must be 2-D, got {matrix.ndim}-D")
        m, n = matrix.shape
        if m < 1 or n < 1:
            raise DimensionError(f"sensing matrix must have at least one row and one column, got {m}x{n}")
        if not np.all(np.isfinite(matrix)):
            raise DimensionError("sensing matrix contains NaN or Inf entries")
        self.matrix = matrix
        self.input_shape = (n,)
        self.output_shape = (m,)
        self._factors: dict[tuple[float, float], tuple[np.ndarray, bool]] = {}
        self._factor_lock = Lock()

    @property
    def m(self) -> int:
        return self.matrix.shape[0]

    @property
    def n(self) -> int:
        return self.matrix.shape[1]

    def apply(self, u: np.ndarray) -> np.ndarray:
        self.check_input(u)
        return self.matrix @ u

    def apply_adjoint(self, r: np.ndarray) -> np.ndarray:
        self.check_output(r)
        return self.matrix.T @ r

    def columns(self, support: np.ndarray) -> np.ndarray:
        """Submatrix A_Lambda made of the columns in support."""
        return self.matrix[:, support]

    def small_system(self, lam: float, kappa: float) -> np.ndarray:
        """The m x m matrix I + lam*kappa*A A^T."""
        return np.eye(self.m) + lam * kappa * (self.matrix @ self.matrix.T)

    def factor(self, lam: float, kappa: float) -> tuple[np.ndarray, bool]:
        """Cholesky factor of I + lam*kappa*A A^T in scipy cho_factor form, cached per (lam, kappa)."""
        key = (float(lam), float(kappa))
        with self._factor_lock:
            cached = self._factors.get(key)
            if cached is not None:
                return cached
            try:
                factor = scipy.linalg.cho_factor(self.small_system(lam, kappa), lower=True, check_finite=False)
            except np.linalg.LinAlgError as e:
                raise NumericError(f"Cholesky factorization of I + lam*kappa*A A^T failed for lam={lam}, kappa={kappa}: {e}") from e
            logger.debug(f"[dense-operator] factored {self.m}x{self.m} system for lam={lam:.6g}, kappa={kappa:.6g}")
            self._factors[key] = factor
            return factor
