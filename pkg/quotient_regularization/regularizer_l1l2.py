import math

import numpy as np

from quotient_regularization.custom_types import RegularizerKind
from quotient_regularization.regularizer_abstract import AbstractRegularizer


class L1OverL2(AbstractRegularizer):
    """R(u) = ||u||_1 / ||u||_2, the scale-invariant surrogate of the L0 count."""

    name = RegularizerKind.L1_OVER_L2
    domain = "signal"

    def J(self, u: np.ndarray) -> float:
        return float(np.abs(u).sum())

    def H(self, u: np.ndarray) -> float:
        return float(np.linalg.norm(u))

    def subgrad_J(self, u: np.ndarray) -> np.ndarray:
        return np.sign(u)

    def _subgrad_H(self, u: np.ndarray, h: float) -> np.ndarray:
        return u / h

    def upper_bound(self, ambient_dims: tuple[int, ...]) -> float:
        return math.sqrt(math.prod(ambient_dims))
