import numpy as np

from quotient_regularization.errors import DimensionError


def check_image(u: np.ndarray) -> None:
    if np.ndim(u) != 2:
        raise DimensionError(f"image must be 2-D, got shape {np.shape(u)}")
    height, width = np.shape(u)
    if height < 2 or width < 2:
        raise DimensionError(f"image must be at least 2x2 for the gradient to be defined, got {height}x{width}")


def grad(u: np.ndarray) -> np.ndarray:
    """Forward differences with periodic wrap.

    Returns a (2, H, W) field: index 0 holds x-differences (along columns),
    index 1 holds y-differences (along rows).
    """
    check_image(u)
    return np.stack((np.roll(u, -1, axis=1) - u, np.roll(u, -1, axis=0) - u))


def grad_adjoint(g: np.ndarray) -> np.ndarray:
    """Exact adjoint of grad (the negative periodic divergence)."""
    if np.ndim(g) != 3 or np.shape(g)[0] != 2:
        raise DimensionError(f"gradient field must have shape (2, H, W), got {np.shape(g)}")
    gx, gy = g[0], g[1]
    return (np.roll(gx, 1, axis=1) - gx) + (np.roll(gy, 1, axis=0) - gy)


def laplacian_symbol(height: int, width: int) -> np.ndarray:
    """Fourier diagonal of D^T D for the periodic forward-difference gradient."""
    ky = 2.0 - 2.0 * np.cos(2.0 * np.pi * np.arange(height) / height)
    kx = 2.0 - 2.0 * np.cos(2.0 * np.pi * np.arange(width) / width)
    return ky[:, None] + kx[None, :]
