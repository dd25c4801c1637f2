from abc import ABC, abstractmethod

import numpy as np

from quotient_regularization.errors import DimensionError


class AbstractOperator(ABC):
    """
    Abstract measurement operator A with its adjoint.

    The measurement space may be complex (masked Fourier data); it is treated as a
    real vector space with inner product Re<a, b>, so the adjoint always maps back
    to real unknowns.
    """

    input_shape: tuple[int, ...]
    output_shape: tuple[int, ...]

    @abstractmethod
    def apply(self, u: np.ndarray) -> np.ndarray:
        """Returns Au."""
        pass

    @abstractmethod
    def apply_adjoint(self, r: np.ndarray) -> np.ndarray:
        """Returns A^T r."""
        pass

    def check_input(self, u: np.ndarray) -> None:
        if np.shape(u) != self.input_shape:
            raise DimensionError(f"{type(self).__name__} expects input of shape {self.input_shape}, got {np.shape(u)}")

    def check_output(self, r: np.ndarray) -> None:
        if np.shape(r) != self.output_shape:
            raise DimensionError(f"{type(self).__name__} expects measurements of shape {self.output_shape}, got {np.shape(r)}")

    @staticmethod
    def inner(a: np.ndarray, b: np.ndarray) -> float:
        """Real inner product used in both the unknown and the measurement space."""
        return float(np.vdot(a, b).real)

    def residual(self, u: np.ndarray, f: np.ndarray) -> np.ndarray:
        self.check_output(f)
        return self.apply(u) - f
