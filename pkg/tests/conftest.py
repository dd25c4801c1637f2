import os
import sys
import textwrap

import numpy as np
import pytest

# Add the project root to path so we can import modules
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

from quotient_regularization.config import Config  # noqa: E402
from quotient_regularization.custom_types import Problem, SolverConfig  # noqa: E402
from quotient_regularization.datagen import add_noise, gen_gaussian_matrix, gen_sparse_signal, shepp_logan  # noqa: E402
from quotient_regularization.operator_fourier import RadialFourierOperator  # noqa: E402

SMALL_SOLVER_YAML = """
solver:
  beta: 1.0
  rho: 1.0
  lambda: auto
  lambda_scale: 60.0
  mu: 0.1
  eps: 1.0e-6
  k_max: 15
  j_max: 40
  l1_j_max: 300
  seed: 0
"""


@pytest.fixture
def write_config(tmp_path, mocker):
    """Writes YAML text to a temporary file and points Config at it."""

    def _write(text: str, name: str = "test.yaml") -> str:
        path = tmp_path / name
        path.write_text(textwrap.dedent(text), encoding="utf-8")
        mocker.patch.object(Config, "config_filename", str(path))
        return str(path)

    return _write


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def solver_config():
    return SolverConfig(beta=1.0, rho=1.0, lam=5.0, eps=1e-6, k_max=20, j_max=60, mu=0.1, l1_j_max=500)


@pytest.fixture
def small_signal_problem():
    """20 x 40 Gaussian problem with a 4-sparse truth and light noise."""
    operator = gen_gaussian_matrix(20, 40, seed=7)
    u_true = gen_sparse_signal(40, 4, seed=7)
    f = add_noise(operator.apply(u_true), 0.01, seed=7)
    return Problem(operator, f), u_true


@pytest.fixture
def small_image_problem():
    """32 x 32 phantom sampled on 12 radial lines, noiseless."""
    truth = shepp_logan(32, 32)
    operator = RadialFourierOperator.from_lines(32, 32, 12)
    return Problem(operator, operator.apply(truth)), truth


def explicit_gradient_matrix(height: int, width: int) -> np.ndarray:
    """D as a (2HW) x (HW) matrix, built entry by entry from the periodic forward-difference stencil."""
    n = height * width
    D = np.zeros((2 * n, n))
    for i in range(height):
        for j in range(width):
            p = i * width + j
            D[p, i * width + (j + 1) % width] += 1.0
            D[p, p] -= 1.0
            D[n + p, ((i + 1) % height) * width + j] += 1.0
            D[n + p, p] -= 1.0
    return D


@pytest.fixture
def gradient_matrix():
    return explicit_gradient_matrix
