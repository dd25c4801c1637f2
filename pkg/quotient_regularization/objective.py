import math

import numpy as np

from quotient_regularization.custom_types import OuterLoopRecord
from quotient_regularization.operator_abstract import AbstractOperator
from quotient_regularization.regularizer_abstract import AbstractRegularizer

# relative rise of G between consecutive outer iterates tolerated before it counts as a descent violation
DESCENT_SLACK = 1e-9


def fidelity(u: np.ndarray, operator: AbstractOperator, f: np.ndarray, lam: float) -> float:
    """(lam/2) ||Au - f||_2^2"""
    r = operator.residual(u, f)
    return 0.5 * lam * float(np.vdot(r, r).real)


def objective_G(u: np.ndarray, regularizer: AbstractRegularizer, operator: AbstractOperator, f: np.ndarray, lam: float) -> float:
    """G(u) = R(u) + (lam/2) ||Au - f||_2^2, with R(0) = 0."""
    operator.check_input(u)
    return regularizer.ratio(u) + fidelity(u, operator, f, lam)


def upper_bound_R(regularizer: AbstractRegularizer, ambient_dims: tuple[int, ...]) -> float:
    """Finite M with R(u) <= M everywhere; lam > 2M/||f||^2 keeps 0 from being a minimizer."""
    return regularizer.upper_bound(tuple(ambient_dims))


def trace_record(
    k: int,
    u: np.ndarray,
    u_prev: np.ndarray | None,
    penalty: float,
    operator: AbstractOperator,
    f: np.ndarray,
    lam: float,
    inner_iters: int,
) -> OuterLoopRecord:
    """Builds the trace row of iterate u. penalty is the regularization value R(u) (or mu*J(u) for the baselines)."""
    r = operator.residual(u, f)
    fid = 0.5 * lam * float(np.vdot(r, r).real)
    u_norm = float(np.linalg.norm(u))
    if u_prev is None:
        rel_change = math.inf
    else:
        diff = float(np.linalg.norm(u - u_prev))
        rel_change = diff / u_norm if u_norm > 0.0 else (0.0 if diff == 0.0 else math.inf)
    return OuterLoopRecord(
        k=k,
        objective=penalty + fid,
        ratio=penalty,
        fidelity=fid,
        u_norm=u_norm,
        au_minus_f=float(np.linalg.norm(operator.apply(u))) - float(np.linalg.norm(f)),
        rel_change=rel_change,
        inner_iters=inner_iters,
    )


def objective_rose(prev: OuterLoopRecord, cur: OuterLoopRecord) -> bool:
    """True when G rose from prev to cur by more than DESCENT_SLACK relative. The first step (into k = 1) is exempt."""
    return cur.k >= 2 and cur.objective > prev.objective + DESCENT_SLACK * abs(prev.objective)
