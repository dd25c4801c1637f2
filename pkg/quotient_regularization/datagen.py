"""
Seeded experiment inputs: Gaussian sensing matrices, sparse signals, measurement noise
and the Shepp-Logan phantom.

Every generator draws from numpy's Philox counter-based bit generator keyed by
SeedSequence([seed, stream]). Different streams keep the matrix, the signal and the
noise of one trial independent of each other and of the order in which they are drawn.
"""

import logging

import numpy as np

from quotient_regularization.errors import ArgumentError, DimensionError
from quotient_regularization.operator_dense import DenseOperator

logger = logging.getLogger(__name__)


class Stream:
    MATRIX = 0
    SIGNAL = 1
    NOISE = 2
    PROPERTIES = 3


# Modified Shepp-Logan (Toft): intensity, semi-axis a, semi-axis b, x0, y0, angle in degrees
SHEPP_LOGAN_ELLIPSES = np.array(
    [
        [1.0, 0.69, 0.92, 0.0, 0.0, 0.0],
        [-0.8, 0.6624, 0.8740, 0.0, -0.0184, 0.0],
        [-0.2, 0.1100, 0.3100, 0.22, 0.0, -18.0],
        [-0.2, 0.1600, 0.4100, -0.22, 0.0, 18.0],
        [0.1, 0.2100, 0.2500, 0.0, 0.35, 0.0],
        [0.1, 0.0460, 0.0460, 0.0, 0.1, 0.0],
        [0.1, 0.0460, 0.0460, 0.0, -0.1, 0.0],
        [0.1, 0.0460, 0.0230, -0.08, -0.605, 0.0],
        [0.1, 0.0230, 0.0230, 0.0, -0.606, 0.0],
        [0.1, 0.0230, 0.0460, 0.06, -0.605, 0.0],
    ]
)


def make_rng(seed: int, stream: int) -> np.random.Generator:
    if seed < 0:
        raise ArgumentError(f"seed must be unsigned, got {seed}")
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, stream])))


def gen_gaussian_matrix(m: int, n: int, seed: int) -> DenseOperator:
    """
    m x n standard normal matrix, each column shifted to zero mean and scaled to unit norm.
    A single row cannot have both, so for m = 1 the columns are only scaled: every entry is +-1.
    """
    if m < 1 or n < 1:
        raise DimensionError(f"need m >= 1 and n >= 1, got m={m}, n={n}")
    rng = make_rng(seed, Stream.MATRIX)
    matrix = rng.standard_normal((m, n))
    if m > 1:
        matrix -= matrix.mean(axis=0, keepdims=True)
    matrix /= np.linalg.norm(matrix, axis=0, keepdims=True)
    return DenseOperator(matrix)


def gen_sparse_signal(n: int, s: int, seed: int) -> np.ndarray:
    """Length-n vector with s nonzeros on a uniformly drawn support, amplitudes N(0, 1)."""
    if not 1 <= s <= n:
        raise ArgumentError(f"sparsity must satisfy 1 <= s <= n, got s={s}, n={n}")
    rng = make_rng(seed, Stream.SIGNAL)
    u = np.zeros(n)
    support = np.sort(rng.choice(n, size=s, replace=False))
    values = rng.standard_normal(s)
    # a zero draw would silently lower the sparsity
    values[values == 0.0] = 1.0
    u[support] = values
    return u


def add_noise(clean: np.ndarray, sigma: float, seed: int) -> np.ndarray:
    """Adds i.i.d. N(0, sigma^2) to every real component (real and imaginary parts of complex data)."""
    if sigma < 0:
        raise ArgumentError(f"sigma must be non-negative, got {sigma}")
    clean = np.asarray(clean)
    if sigma == 0:
        return clean.copy()
    rng = make_rng(seed, Stream.NOISE)
    if np.iscomplexobj(clean):
        noise = rng.standard_normal(clean.shape) + 1j * rng.standard_normal(clean.shape)
    else:
        noise = rng.standard_normal(clean.shape)
    return clean + sigma * noise


def shepp_logan(height: int, width: int) -> np.ndarray:
    """
    Modified Shepp-Logan phantom on a height x width grid, values clipped to [0, 1].

    x runs from -1 (left) to 1 (right), y from 1 (top row) to -1 (bottom row).
    """
    if height < 32 or width < 32:
        raise DimensionError(f"phantom must be at least 32x32, got {height}x{width}")
    x = np.tile(np.linspace(-1.0, 1.0, width), (height, 1))
    y = np.tile(np.linspace(1.0, -1.0, height)[:, None], (1, width))
    image = np.zeros((height, width))
    for intensity, a, b, x0, y0, angle in SHEPP_LOGAN_ELLIPSES:
        phi = np.deg2rad(angle)
        cos_p, sin_p = np.cos(phi), np.sin(phi)
        dx, dy = x - x0, y - y0
        inside = ((dx * cos_p + dy * sin_p) ** 2) / a**2 + ((dy * cos_p - dx * sin_p) ** 2) / b**2 <= 1.0
        image[inside] += intensity
    return np.clip(image, 0.0, 1.0)
