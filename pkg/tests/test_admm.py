import numpy as np
import pytest

from quotient_regularization.admm import (
    kkt_residual,
    shrink,
    solve_image_subproblem,
    solve_signal_subproblem,
    subproblem_objective,
    woodbury_solve,
)
from quotient_regularization.custom_types import SolverConfig
from quotient_regularization.datagen import shepp_logan
from quotient_regularization.errors import ArgumentError, DegenerateIterateError
from quotient_regularization.gradient import grad
from quotient_regularization.operator_dense import DenseOperator
from quotient_regularization.operator_fourier import RadialFourierOperator
from quotient_regularization.regularizer_grad import GradL1OverL2
from quotient_regularization.regularizer_l1l2 import L1OverL2


def proximal_gradient(matrix, f, u_k, h_k, beta, lam, weight, iterations):
    """Plain ISTA on the signal subproblem, used as an independent reference."""
    lipschitz = beta + lam * np.linalg.norm(matrix, 2) ** 2
    u = u_k.copy()
    for _ in range(iterations):
        g = beta * (u - u_k) - h_k + lam * matrix.T @ (matrix @ u - f)
        z = u - g / lipschitz
        u = np.sign(z) * np.maximum(np.abs(z) - weight / lipschitz, 0.0)
    return u


def test_shrink_examples():
    np.testing.assert_array_equal(shrink(np.array([3.0]), 1.0), [2.0])
    np.testing.assert_array_equal(shrink(np.array([-0.5]), 1.0), [0.0])
    np.testing.assert_array_equal(shrink(np.array([-2.5, 0.0]), 1.0), [-1.5, 0.0])


def test_shrink_rejects_negative_threshold():
    with pytest.raises(ArgumentError):
        shrink(np.ones(2), -0.1)


def test_woodbury_zero_matrix():
    b = np.array([1.0, -2.0, 3.0, 0.5])
    np.testing.assert_allclose(woodbury_solve(DenseOperator(np.zeros((3, 4))), 0.25, 2.0, b), 0.25 * b)


def test_woodbury_matches_dense_solve(rng):
    for _ in range(100):
        matrix = rng.standard_normal((4, 10))
        b = rng.standard_normal(10)
        lam, beta, rho = 3.0, 1.0, 2.0
        kappa = 1.0 / (beta + rho)
        x = woodbury_solve(DenseOperator(matrix), kappa, lam, b)
        system = lam * matrix.T @ matrix + (beta + rho) * np.eye(10)
        np.testing.assert_allclose(x, np.linalg.solve(system, b), rtol=1e-10, atol=1e-12)
        assert np.linalg.norm(system @ x - b) / np.linalg.norm(b) <= 1e-10


def test_signal_subproblem_pure_prox():
    config = SolverConfig(beta=1.0, rho=1.0, lam=1.0, eps=1e-12, j_max=5000)
    op = DenseOperator(np.zeros((2, 2)))
    u_k = np.array([2.0, 0.0])
    state = solve_signal_subproblem(u_k, np.zeros(2), op, np.zeros(2), config, l1_weight=0.5)
    np.testing.assert_allclose(state.u, [1.5, 0.0], atol=1e-8)
    assert state.converged


def test_signal_subproblem_matches_proximal_gradient(rng):
    config = SolverConfig(beta=1.0, rho=2.0, lam=4.0, eps=1e-13, j_max=20000)
    for _ in range(5):
        matrix = rng.standard_normal((5, 12))
        f = rng.standard_normal(5)
        u_k = rng.standard_normal(12)
        h_k = 0.1 * rng.standard_normal(12)
        weight = 1.0 / np.linalg.norm(u_k)
        state = solve_signal_subproblem(u_k, h_k, DenseOperator(matrix), f, config, l1_weight=weight)
        reference = proximal_gradient(matrix, f, u_k, h_k, 1.0, 4.0, weight, 20000)
        np.testing.assert_allclose(state.u, reference, atol=1e-6)

        residual = kkt_residual(state.u, u_k, h_k, L1OverL2(), DenseOperator(matrix), f, config, l1_weight=weight)
        assert residual <= 1e-6


def test_signal_subproblem_reports_objective(small_signal_problem, solver_config):
    problem, _ = small_signal_problem
    u_k = problem.operator.apply_adjoint(problem.f)
    h_k = L1OverL2().linear_term(u_k)
    weight = 1.0 / np.linalg.norm(u_k)
    state = solve_signal_subproblem(u_k, h_k, problem.operator, problem.f, solver_config, l1_weight=weight)
    expected = subproblem_objective(state.u, u_k, h_k, problem.operator, problem.f, solver_config.lam, 1.0, weight, image=False)
    assert state.objective == pytest.approx(expected)
    assert state.j <= solver_config.j_max


def test_signal_subproblem_warm_start(small_signal_problem, solver_config):
    problem, _ = small_signal_problem
    u_k = problem.operator.apply_adjoint(problem.f)
    h_k = np.zeros_like(u_k)
    first = solve_signal_subproblem(u_k, h_k, problem.operator, problem.f, solver_config, l1_weight=0.3, j_max=5)
    second = solve_signal_subproblem(u_k, h_k, problem.operator, problem.f, solver_config, l1_weight=0.3, j_max=5, state=first)
    # warm start continues from the split variables, not from scratch
    assert not np.array_equal(first.y, second.y)
    np.testing.assert_array_equal(first.y, solve_signal_subproblem(u_k, h_k, problem.operator, problem.f, solver_config, 0.3, j_max=5).y)


def test_subproblem_rejects_degenerate_weight(small_signal_problem, solver_config):
    problem, _ = small_signal_problem
    u = np.zeros(problem.operator.input_shape)
    for weight in (0.0, -1.0, float("inf")):
        with pytest.raises(DegenerateIterateError):
            solve_signal_subproblem(u, u, problem.operator, problem.f, solver_config, l1_weight=weight)


def test_image_subproblem_requires_fourier_operator(small_signal_problem, solver_config):
    problem, _ = small_signal_problem
    with pytest.raises(ArgumentError):
        solve_image_subproblem(np.zeros((4, 4)), np.zeros((4, 4)), problem.operator, problem.f, solver_config, l1_weight=1.0)


def test_image_subproblem_full_mask_reproduces_image():
    truth = shepp_logan(32, 32)
    op = RadialFourierOperator(np.ones((32, 32), dtype=bool))
    config = SolverConfig(beta=1.0, rho=1.0, lam=1e6, eps=1e-10, j_max=200)
    u_k = np.zeros((32, 32))
    state = solve_image_subproblem(u_k, np.zeros_like(u_k), op, op.apply(truth), config, l1_weight=1e-3)
    assert np.linalg.norm(state.u - truth) / np.linalg.norm(truth) <= 1e-4


def test_image_subproblem_kkt(rng):
    truth = shepp_logan(32, 32)[::2, ::2]
    op = RadialFourierOperator.from_lines(16, 16, 5)
    f = op.apply(truth)
    config = SolverConfig(beta=1.0, rho=1.0, lam=10.0, eps=1e-12, j_max=3000)
    u_k = op.apply_adjoint(f)
    h_k = GradL1OverL2().linear_term(u_k)
    weight = 1.0 / GradL1OverL2().H(u_k)
    state = solve_image_subproblem(u_k, h_k, op, f, config, l1_weight=weight)
    residual = kkt_residual(state.u, u_k, h_k, GradL1OverL2(), op, f, config, l1_weight=weight, dual=config.rho * state.eta)
    assert residual <= 1e-5


def test_image_subproblem_matches_dense_admm(rng, gradient_matrix):
    side = 8
    op = RadialFourierOperator.from_lines(side, side, 3)
    D = gradient_matrix(side, side)
    basis = np.eye(side * side).reshape(-1, side, side)
    AtA = np.stack([op.apply_adjoint(op.apply(e)).ravel() for e in basis], axis=1)

    lam, rho, beta, weight, steps = 2.0, 1.5, 1.0, 0.2, 150
    config = SolverConfig(beta=beta, rho=rho, lam=lam, eps=1e-300, j_max=steps)
    u_k = rng.standard_normal((side, side))
    h_k = 0.1 * rng.standard_normal((side, side))
    f = op.apply(rng.standard_normal((side, side)))
    state = solve_image_subproblem(u_k, h_k, op, f, config, l1_weight=weight)

    system = lam * AtA + rho * D.T @ D + beta * np.eye(side * side)
    rhs_fixed = lam * op.apply_adjoint(f).ravel() + beta * u_k.ravel() + h_k.ravel()
    y = D @ u_k.ravel()
    eta = np.zeros_like(y)
    for _ in range(steps):
        u = np.linalg.solve(system, rhs_fixed + rho * D.T @ (y - eta))
        du = D @ u
        y = np.sign(du + eta) * np.maximum(np.abs(du + eta) - weight / rho, 0.0)
        eta = eta + du - y

    np.testing.assert_allclose(state.u.ravel(), u, atol=1e-8)
    np.testing.assert_allclose(grad(state.u).ravel(), D @ u, atol=1e-8)


def test_kkt_residual_exact_minimizer():
    # 1-D instance: min (1/2)(u - 2)^2 + 0.5|u|, A = 0, solution 1.5
    config = SolverConfig(beta=1.0, rho=1.0, lam=1.0)
    op = DenseOperator(np.zeros((1, 1)))
    args = (np.array([2.0]), np.zeros(1), L1OverL2(), op, np.zeros(1), config)
    assert kkt_residual(np.array([1.5]), *args, l1_weight=0.5) <= 1e-12
    assert kkt_residual(np.array([1.5 + 1e-3]), *args, l1_weight=0.5) == pytest.approx(1e-3, rel=1e-6)
    assert kkt_residual(np.array([-4.0]), *args, l1_weight=0.5) > 1.0
