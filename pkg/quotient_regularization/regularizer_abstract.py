from abc import ABC, abstractmethod

import numpy as np

from quotient_regularization.errors import DegenerateIterateError


class AbstractRegularizer(ABC):
    """
    Quotient regularizer R = J/H with J and H convex and absolutely one-homogeneous.

    Concrete classes supply J, H, one subgradient of each and the bound on R.
    R(u) is 0 whenever H(u) = 0, matching the convention J(0)/H(0) := 0.
    """

    name: str
    # "signal" regularizers have J = ||u||_1; "image" ones have J = ||D u||_1
    domain: str

    @abstractmethod
    def J(self, u: np.ndarray) -> float:
        pass

    @abstractmethod
    def H(self, u: np.ndarray) -> float:
        pass

    @abstractmethod
    def subgrad_J(self, u: np.ndarray) -> np.ndarray:
        """One element p of the subdifferential of J at u."""
        pass

    @abstractmethod
    def _subgrad_H(self, u: np.ndarray, h: float) -> np.ndarray:
        """One element q of the subdifferential of H at u, given H(u) = h > 0."""
        pass

    @abstractmethod
    def upper_bound(self, ambient_dims: tuple[int, ...]) -> float:
        """A finite M with R(u) <= M over the whole space."""
        pass

    def evaluate(self, u: np.ndarray) -> tuple[float, float, float]:
        j = self.J(u)
        h = self.H(u)
        return j, h, (j / h if h > 0.0 else 0.0)

    def ratio(self, u: np.ndarray) -> float:
        return self.evaluate(u)[2]

    def subgrad_H(self, u: np.ndarray) -> np.ndarray:
        h = self.H(u)
        if h <= 0.0:
            raise DegenerateIterateError(f"{self.name}: H(u) = 0, subgradient q is not computable")
        return self._subgrad_H(u, h)

    def linear_term(self, u_k: np.ndarray) -> np.ndarray:
        """h^k = (R(u^k)/H(u^k)) q^k, the explicit part of the semi-implicit step."""
        j, h, _ = self.evaluate(u_k)
        if h <= 0.0:
            raise DegenerateIterateError(f"{self.name}: H(u^k) = 0, linear term h^k is not computable")
        return (j / (h * h)) * self._subgrad_H(u_k, h)

    def __repr__(self) -> str:
        return f"{type(self).__name__}()"
