import logging

import numpy as np

from quotient_regularization.admm import kkt_residual, solve_image_subproblem, solve_signal_subproblem
from quotient_regularization.custom_types import AdmmState, Problem, SolverConfig, SolveResult, Status
from quotient_regularization.errors import ArgumentError, DegenerateIterateError
from quotient_regularization.gradient import grad
from quotient_regularization.objective import objective_G, objective_rose, trace_record
from quotient_regularization.operator_dense import DenseOperator
from quotient_regularization.operator_fourier import RadialFourierOperator
from quotient_regularization.regularizer import make_regularizer
from quotient_regularization.regularizer_abstract import AbstractRegularizer

logger = logging.getLogger(__name__)


def problem_domain(problem: Problem) -> str:
    if isinstance(problem.operator, DenseOperator):
        return "signal"
    if isinstance(problem.operator, RadialFourierOperator):
        return "image"
    raise ArgumentError(f"unsupported operator {type(problem.operator).__name__}")


def l1_solve(problem: Problem, config: SolverConfig, mu: float | None = None, u0: np.ndarray | None = None) -> SolveResult:
    """
    min mu*||u||_1 + (lam/2)||Au - f||^2 on signals, mu*||Du||_1 + (lam/2)||Au - f||^2 (TV) on images.

    Same ADMM as the quotient subproblem with beta = 0 and h = 0, run for up to
    config.l1_j_max iterations. The trace holds the start point and the result.
    """
    mu = config.mu if mu is None else float(mu)
    if mu <= 0.0:
        raise ArgumentError(f"mu must be positive, got {mu}")
    op, f = problem.operator, problem.f
    domain = problem_domain(problem)

    if u0 is None:
        u0 = np.zeros(op.input_shape) if domain == "signal" else op.apply_adjoint(f)
    h = np.zeros(op.input_shape)
    if domain == "signal":
        state = solve_signal_subproblem(u0, h, op, f, config, l1_weight=mu, beta=0.0, j_max=config.l1_j_max)
        penalty = mu * float(np.abs(state.u).sum())
        carrier = make_regularizer("l1_l2")
    else:
        state = solve_image_subproblem(u0, h, op, f, config, l1_weight=mu, beta=0.0, j_max=config.l1_j_max)
        penalty = mu * float(np.abs(grad(state.u)).sum())
        carrier = make_regularizer("grad_l1_l2")

    u0_penalty = mu * float(np.abs(u0).sum() if domain == "signal" else np.abs(grad(u0)).sum())
    trace = [
        trace_record(0, u0, None, u0_penalty, op, f, config.lam, 0),
        trace_record(1, state.u, u0, penalty, op, f, config.lam, state.j),
    ]
    residual = kkt_residual(
        state.u, state.u, h, carrier, op, f, config, l1_weight=mu, beta=0.0, dual=config.rho * state.eta
    )
    status = Status.CONVERGED if state.converged else Status.MAX_ITERATIONS
    logger.debug(f"[l1][{domain}] {status} after {state.j} iterations, kkt={residual:.3e}")
    return SolveResult(state.u, trace, status, stationarity=residual)


def dca_direction(u: np.ndarray, regularizer: AbstractRegularizer, mu: float) -> np.ndarray:
    """v = mu*s - (p - R q)/H, one element of the subdifferential of mu||u||_1 - R(u)."""
    j, h, r = regularizer.evaluate(u)
    if h <= 0.0:
        raise DegenerateIterateError(f"{regularizer.name}: H(u) = 0, DCA linearization is not computable")
    p = regularizer.subgrad_J(u)
    q = regularizer.subgrad_H(u)
    return mu * np.sign(u) - (p - r * q) / h


def dca_solve(
    problem: Problem,
    regularizer: AbstractRegularizer,
    config: SolverConfig,
    mu: float | None = None,
    u0: np.ndarray | None = None,
) -> SolveResult:
    """
    Difference-of-convex iteration for min R(u) + (lam/2)||Au - f||^2, written as
    D1 - D2 with D1 = mu||u||_1 + (lam/2)||Au - f||^2 and D2 = mu||u||_1 - R(u).
    Each step minimizes D1 - <v^k, u> by the lasso ADMM.
    """
    mu = config.mu if mu is None else float(mu)
    if mu <= 0.0:
        raise ArgumentError(f"DCA needs mu > 0, got {mu}")
    if regularizer.domain != "signal" or problem_domain(problem) != "signal":
        raise ArgumentError("DCA is only defined for the signal regularizers")
    op, f, lam = problem.operator, problem.f, config.lam

    u = l1_solve(problem, config, mu=mu).u_star if u0 is None else np.asarray(u0, dtype=np.float64).copy()
    trace = [trace_record(0, u, None, regularizer.ratio(u), op, f, lam, 0)]
    state: AdmmState | None = None
    v = np.zeros_like(u)
    status = Status.MAX_ITERATIONS

    for k in range(1, config.k_max + 1):
        try:
            v = dca_direction(u, regularizer, mu)
        except DegenerateIterateError as e:
            logger.warning(f"[dca][k={k}] {e}")
            return SolveResult(u, trace, Status.DEGENERATE_ITERATE, message=str(e))

        state = solve_signal_subproblem(u, v, op, f, config, l1_weight=mu, beta=0.0, state=state)
        record = trace_record(k, state.u, u, regularizer.ratio(state.u), op, f, lam, state.j)
        if objective_rose(trace[-1], record):
            logger.warning(f"[dca][k={k}] objective rose from {trace[-1].objective:.10g} to {record.objective:.10g}")
        trace.append(record)
        logger.debug(f"[dca][k={k}] G={record.objective:.10g} rel_change={record.rel_change:.3e} inner={state.j}")
        u = state.u
        if record.rel_change <= config.eps:
            status = Status.CONVERGED
            break

    try:
        v = dca_direction(u, regularizer, mu)
        residual = kkt_residual(u, u, v, regularizer, op, f, config, l1_weight=mu, beta=0.0)
    except DegenerateIterateError as e:
        logger.warning(f"[dca] {e}")
        return SolveResult(u, trace, Status.DEGENERATE_ITERATE, message=str(e))
    logger.debug(f"[dca] {status} at k={trace[-1].k}, G={objective_G(u, regularizer, op, f, lam):.10g}")
    return SolveResult(u, trace, status, stationarity=residual)
