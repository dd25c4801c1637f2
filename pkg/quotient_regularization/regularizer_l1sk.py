import math

import numpy as np

from quotient_regularization.custom_types import RegularizerKind
from quotient_regularization.errors import ArgumentError, DimensionError
from quotient_regularization.regularizer_abstract import AbstractRegularizer


class L1OverSK(AbstractRegularizer):
    """
    R(u) = ||u||_1 / ||u||_(K), with ||u||_(K) the sum of the K largest magnitudes.

    K = 1 gives the L1/Linf ratio. Ties at the K-th magnitude are broken by
    ascending index so the selected set (and therefore q) is reproducible.
    """

    domain = "signal"

    def __init__(self, K: int):
        if K < 1:
            raise ArgumentError(f"K must be at least 1, got {K}")
        self.K = int(K)
        self.name = RegularizerKind.L1_OVER_LINF if self.K == 1 else RegularizerKind.L1_OVER_SK

    def _check_k(self, u: np.ndarray) -> None:
        if self.K > np.size(u):
            raise DimensionError(f"K={self.K} exceeds the signal length {np.size(u)}")

    def top_k_indices(self, u: np.ndarray) -> np.ndarray:
        """Omega_K(u): stable sort on descending magnitude, so equal magnitudes keep index order."""
        self._check_k(u)
        return np.argsort(-np.abs(u), kind="stable")[: self.K]

    def J(self, u: np.ndarray) -> float:
        return float(np.abs(u).sum())

    def H(self, u: np.ndarray) -> float:
        self._check_k(u)
        return float(np.abs(u)[self.top_k_indices(u)].sum())

    def subgrad_J(self, u: np.ndarray) -> np.ndarray:
        return np.sign(u)

    def _subgrad_H(self, u: np.ndarray, h: float) -> np.ndarray:
        # sign(u) on Omega_K lies in the dual-norm unit ball and attains ||u||_(K)
        q = np.zeros_like(u, dtype=np.float64)
        idx = self.top_k_indices(u)
        q[idx] = np.sign(u[idx])
        return q

    def upper_bound(self, ambient_dims: tuple[int, ...]) -> float:
        n = math.prod(ambient_dims)
        if self.K >= n:
            return math.sqrt(n)
        return n / self.K

    def __repr__(self) -> str:
        return f"L1OverSK(K={self.K})"
