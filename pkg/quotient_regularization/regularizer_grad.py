import math

import numpy as np

from quotient_regularization.custom_types import RegularizerKind
from quotient_regularization.gradient import check_image, grad, grad_adjoint
from quotient_regularization.regularizer_abstract import AbstractRegularizer


class GradL1OverL2(AbstractRegularizer):
    """
    R(u) = ||D u||_1 / ||D u||_2 on an image grid, D the periodic forward-difference
    gradient. Both norms run over the flattened (2, H, W) field (anisotropic TV on top).
    """

    name = RegularizerKind.GRAD_L1_OVER_L2
    domain = "image"

    def J(self, u: np.ndarray) -> float:
        return float(np.abs(grad(u)).sum())

    def H(self, u: np.ndarray) -> float:
        return float(np.linalg.norm(grad(u)))

    def evaluate(self, u: np.ndarray) -> tuple[float, float, float]:
        # one gradient evaluation for both norms
        g = grad(u)
        j = float(np.abs(g).sum())
        h = float(np.linalg.norm(g))
        return j, h, (j / h if h > 0.0 else 0.0)

    def subgrad_J(self, u: np.ndarray) -> np.ndarray:
        return grad_adjoint(np.sign(grad(u)))

    def _subgrad_H(self, u: np.ndarray, h: float) -> np.ndarray:
        return grad_adjoint(grad(u) / h)

    def upper_bound(self, ambient_dims: tuple[int, ...]) -> float:
        height, width = ambient_dims
        check_image(np.empty((height, width)))
        return math.sqrt(2 * height * width)
