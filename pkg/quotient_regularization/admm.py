"""
Scaled-dual ADMM for the convex subproblem solved at every outer iteration:

    min_u  (beta/2)||u - u^k||^2 - <h^k, u> + w * J(u) + (lam/2)||Au - f||^2

with w = 1/H(u^k) for the quotient models and w = mu for the L1 / TV baselines.
J is ||u||_1 on signals and ||Du||_1 on images.
"""

import logging
import math

import numpy as np
import scipy.linalg

from quotient_regularization.custom_types import AdmmState, SolverConfig
from quotient_regularization.errors import ArgumentError, DegenerateIterateError
from quotient_regularization.gradient import grad, grad_adjoint
from quotient_regularization.operator_abstract import AbstractOperator
from quotient_regularization.operator_dense import DenseOperator
from quotient_regularization.operator_fourier import RadialFourierOperator
from quotient_regularization.regularizer_abstract import AbstractRegularizer

logger = logging.getLogger(__name__)

# the primal residual must also fall below this fraction of the iterate scale
PRIMAL_FLOOR = 1e-8
KKT_DUAL_STEPS = 300


def shrink(x: np.ndarray, t: float) -> np.ndarray:
    """Soft thresholding, the proximal map of t*||.||_1."""
    if t < 0:
        raise ArgumentError(f"shrink threshold must be non-negative, got {t}")
    return np.sign(x) * np.maximum(np.abs(x) - t, 0.0)


def woodbury_solve(operator: DenseOperator, kappa: float, lam: float, b: np.ndarray) -> np.ndarray:
    """(lam A^T A + I/kappa)^-1 b, through the m x m system I + lam*kappa*A A^T."""
    if kappa <= 0:
        raise ArgumentError(f"kappa must be positive, got {kappa}")
    factor = operator.factor(lam, kappa)
    inner = scipy.linalg.cho_solve(factor, operator.apply(b), check_finite=False)
    return kappa * b - lam * kappa * kappa * operator.apply_adjoint(inner)


def _check_weight(l1_weight: float) -> None:
    if not math.isfinite(l1_weight) or l1_weight <= 0.0:
        raise DegenerateIterateError(f"L1 weight must be finite and positive, got {l1_weight}")


def _relative_change(new: np.ndarray, old: np.ndarray) -> float:
    scale = float(np.linalg.norm(new))
    diff = float(np.linalg.norm(new - old))
    if scale == 0.0:
        return 0.0 if diff == 0.0 else math.inf
    return diff / scale


def subproblem_objective(
    u: np.ndarray,
    u_k: np.ndarray,
    h_k: np.ndarray,
    operator: AbstractOperator,
    f: np.ndarray,
    lam: float,
    beta: float,
    l1_weight: float,
    image: bool,
) -> float:
    r = operator.residual(u, f)
    j_term = float(np.abs(grad(u)).sum()) if image else float(np.abs(u).sum())
    return (
        0.5 * beta * float(np.sum((u - u_k) ** 2))
        - float(np.vdot(h_k, u).real)
        + l1_weight * j_term
        + 0.5 * lam * float(np.vdot(r, r).real)
    )


def solve_signal_subproblem(
    u_k: np.ndarray,
    h_k: np.ndarray,
    operator: DenseOperator,
    f: np.ndarray,
    config: SolverConfig,
    l1_weight: float,
    beta: float | None = None,
    state: AdmmState | None = None,
    j_max: int | None = None,
) -> AdmmState:
    """
    Splits u = y: the L1 term acts on u through shrink, the quadratic part on y through
    the Woodbury solve. Warm-starts y and eta from state when given; u always starts
    from u_k. Returns the shrink iterate u_j, which carries exact zeros.
    """
    _check_weight(l1_weight)
    operator.check_input(u_k)
    beta = config.beta if beta is None else beta
    rho, lam = config.rho, config.lam
    kappa = 1.0 / (beta + rho)
    j_max = config.j_max if j_max is None else j_max
    threshold = l1_weight / rho

    # constant part of the y-update right-hand side
    rhs_fixed = beta * u_k + h_k + lam * operator.apply_adjoint(f)

    if state is None:
        y = u_k.astype(np.float64, copy=True)
        eta = np.zeros_like(y)
    else:
        y = state.y.copy()
        eta = state.eta.copy()
    u = u_k.astype(np.float64, copy=True)
    uk_norm = float(np.linalg.norm(u_k))

    converged = False
    primal = math.inf
    j = 0
    while j < j_max:
        u_next = shrink(y - eta, threshold)
        y = woodbury_solve(operator, kappa, lam, rhs_fixed + rho * (u_next + eta))
        eta = eta + u_next - y
        j += 1

        primal = float(np.linalg.norm(u_next - y))
        rel = _relative_change(u_next, u)
        u = u_next
        if rel <= config.inner_eps and primal <= PRIMAL_FLOOR * max(uk_norm, float(np.linalg.norm(u)), 1.0):
            converged = True
            break

    objective = subproblem_objective(u, u_k, h_k, operator, f, lam, beta, l1_weight, image=False)
    logger.debug(f"[admm][signal] j={j} converged={converged} primal={primal:.3e} objective={objective:.10g}")
    return AdmmState(u, y, eta, j=j, converged=converged, primal_residual=primal, objective=objective)


def solve_image_subproblem(
    u_k: np.ndarray,
    h_k: np.ndarray,
    operator: RadialFourierOperator,
    f: np.ndarray,
    config: SolverConfig,
    l1_weight: float,
    beta: float | None = None,
    state: AdmmState | None = None,
    j_max: int | None = None,
) -> AdmmState:
    """
    Splits y = Du. The u-update is one FFT-diagonal solve of
    (lam A^T A + rho D^T D + beta I) u = lam A^T f + beta u^k + h^k + rho D^T (y - eta),
    the y-update is shrink(Du + eta, w/rho).
    """
    _check_weight(l1_weight)
    if not isinstance(operator, RadialFourierOperator):
        raise ArgumentError(f"image subproblem needs a Fourier-diagonal operator, got {type(operator).__name__}")
    operator.check_input(u_k)
    beta = config.beta if beta is None else beta
    rho, lam = config.rho, config.lam
    j_max = config.j_max if j_max is None else j_max
    threshold = l1_weight / rho

    denominator = operator.spectral_denominator(rho, beta, lam)
    rhs_fixed = lam * operator.apply_adjoint(f) + beta * u_k + h_k

    if state is None:
        y = grad(u_k)
        eta = np.zeros_like(y)
    else:
        y = state.y.copy()
        eta = state.eta.copy()
    u = u_k.astype(np.float64, copy=True)
    scale_k = float(np.linalg.norm(y))

    converged = False
    primal = math.inf
    j = 0
    while j < j_max:
        u_next = operator.spectral_solve(denominator, rhs_fixed + rho * grad_adjoint(y - eta))
        du = grad(u_next)
        y = shrink(du + eta, threshold)
        eta = eta + du - y
        j += 1

        primal = float(np.linalg.norm(du - y))
        rel = _relative_change(u_next, u)
        u = u_next
        if rel <= config.inner_eps and primal <= PRIMAL_FLOOR * max(scale_k, float(np.linalg.norm(du)), 1.0):
            converged = True
            break

    objective = subproblem_objective(u, u_k, h_k, operator, f, lam, beta, l1_weight, image=True)
    logger.debug(f"[admm][image] j={j} converged={converged} primal={primal:.3e} objective={objective:.10g}")
    return AdmmState(u, y, eta, j=j, converged=converged, primal_residual=primal, objective=objective)


def kkt_residual(
    u: np.ndarray,
    u_k: np.ndarray,
    h_k: np.ndarray,
    regularizer: AbstractRegularizer,
    operator: AbstractOperator,
    f: np.ndarray,
    config: SolverConfig,
    *,
    l1_weight: float | None = None,
    beta: float | None = None,
    dual: np.ndarray | None = None,
) -> float:
    """
    Distance from 0 to beta(u - u^k) - h^k + lam A^T(Au - f) + w dJ(u).

    Signals: exact, one interval projection per coordinate. Images: the subdifferential
    of ||D.||_1 is D^T applied to a box-constrained field z, so the distance is a small
    box-constrained least-squares problem; it is refined by projected gradient from the
    ADMM certificate (rho*eta) when given. The image value is therefore an upper bound.
    """
    beta = config.beta if beta is None else beta
    if l1_weight is None:
        h = regularizer.H(u_k)
        if h <= 0.0:
            raise DegenerateIterateError(f"{regularizer.name}: H(u^k) = 0, KKT weight is not computable")
        l1_weight = 1.0 / h
    w = l1_weight

    g = beta * (u - u_k) - h_k + config.lam * operator.apply_adjoint(operator.residual(u, f))

    if regularizer.domain == "signal":
        nonzero = u != 0.0
        dist = np.where(nonzero, np.abs(g + w * np.sign(u)), np.maximum(np.abs(g) - w, 0.0))
        return float(np.linalg.norm(dist))

    du = grad(u)
    # entries of Du this small are treated as zeros of the split variable
    zero_set = np.abs(du) <= 1e-6 * max(float(np.abs(du).max()), 1.0)
    z = np.where(zero_set, 0.0, w * np.sign(du))
    if dual is not None:
        z = np.where(zero_set, np.clip(dual, -w, w), z)

    # ||D D^T|| <= 8 for periodic forward differences
    step = 1.0 / 8.0
    best = float(np.linalg.norm(g + grad_adjoint(z)))
    for _ in range(KKT_DUAL_STEPS):
        if not zero_set.any():
            break
        descent = grad(g + grad_adjoint(z))
        z = np.where(zero_set, np.clip(z - step * descent, -w, w), z)
        best = min(best, float(np.linalg.norm(g + grad_adjoint(z))))
    return best
