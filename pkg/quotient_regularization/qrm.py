import logging

import numpy as np

from quotient_regularization.admm import kkt_residual, solve_image_subproblem, solve_signal_subproblem
from quotient_regularization.baselines import l1_solve, problem_domain
from quotient_regularization.custom_types import (
    AdmmState,
    NormMonotonicityReport,
    NormMonotonicityRow,
    Problem,
    SolverConfig,
    SolveResult,
    Status,
)
from quotient_regularization.errors import ArgumentError, DegenerateIterateError, DimensionError
from quotient_regularization.objective import objective_rose, trace_record, upper_bound_R
from quotient_regularization.regularizer_abstract import AbstractRegularizer

logger = logging.getLogger(__name__)

NORM_INCREASE_SLACK = 1e-9
CASE_SCALES = {1: 1.5, 2: 0.5}


class QRMSolver:
    """
    Semi-implicit gradient flow for min R(u) + (lam/2)||Au - f||^2 with R = J/H.

    Each outer step freezes H at u^k and solves the convex problem
        min (beta/2)||u - u^k||^2 - <h^k, u> + J(u)/H(u^k) + (lam/2)||Au - f||^2
    by ADMM, warm-started from the previous step's split variables.
    """

    def __init__(self, problem: Problem, regularizer: AbstractRegularizer, config: SolverConfig):
        domain = problem_domain(problem)
        if domain != regularizer.domain:
            raise ArgumentError(f"regularizer {regularizer.name} works on {regularizer.domain}s, this is a {domain} problem")
        self.problem = problem
        self.regularizer = regularizer
        self.config = config
        self.domain = domain
        self._inner = solve_signal_subproblem if domain == "signal" else solve_image_subproblem
        self.state: AdmmState | None = None

    def _initial_point(self, u0: np.ndarray | None) -> np.ndarray:
        if u0 is None:
            logger.debug(f"[qrm][{self.regularizer.name}] starting from the L1 solution")
            return l1_solve(self.problem, self.config).u_star
        u0 = np.asarray(u0, dtype=np.float64).copy()
        self.problem.operator.check_input(u0)
        if not np.all(np.isfinite(u0)):
            raise DimensionError("initial point contains NaN or Inf entries")
        return u0

    def solve(self, u0: np.ndarray | None = None) -> SolveResult:
        reg, op, f, config = self.regularizer, self.problem.operator, self.problem.f, self.config
        u = self._initial_point(u0)
        self.state = None
        trace = [trace_record(0, u, None, reg.ratio(u), op, f, config.lam, 0)]
        status = Status.MAX_ITERATIONS

        for k in range(1, config.k_max + 1):
            try:
                h_k = reg.linear_term(u)
                weight = 1.0 / reg.H(u)
            except DegenerateIterateError as e:
                logger.warning(f"[qrm][{reg.name}][k={k}] {e}")
                return SolveResult(u, trace, Status.DEGENERATE_ITERATE, message=str(e))

            self.state = self._inner(u, h_k, op, f, config, l1_weight=weight, state=self.state)
            record = trace_record(k, self.state.u, u, reg.ratio(self.state.u), op, f, config.lam, self.state.j)
            if objective_rose(trace[-1], record):
                logger.warning(f"[qrm][{reg.name}][k={k}] objective rose from {trace[-1].objective:.10g} to {record.objective:.10g}")
            trace.append(record)
            logger.debug(
                f"[qrm][{reg.name}][k={k}] G={record.objective:.10g} R={record.ratio:.6g} "
                f"rel_change={record.rel_change:.3e} inner={self.state.j}"
            )
            u = self.state.u
            if record.rel_change <= config.eps:
                status = Status.CONVERGED
                break

        try:
            residual = self.stationarity(u)
        except DegenerateIterateError as e:
            logger.warning(f"[qrm][{reg.name}] final iterate is degenerate: {e}")
            return SolveResult(u, trace, Status.DEGENERATE_ITERATE, message=str(e))

        logger.debug(f"[qrm][{reg.name}] {status} at k={trace[-1].k}, G={trace[-1].objective:.10g}, stationarity={residual:.3e}")
        return SolveResult(u, trace, status, stationarity=residual)

    def stationarity(self, u: np.ndarray) -> float:
        """KKT residual of the outer subproblem at u^k = u, i.e. of the fixed-point condition of the flow."""
        dual = None
        if self.state is not None and self.domain == "image":
            dual = self.config.rho * self.state.eta
        return stationarity_residual(u, self.regularizer, self.problem, self.config, dual=dual)


def qrm_solve(
    problem: Problem,
    regularizer: AbstractRegularizer,
    config: SolverConfig,
    u0: np.ndarray | None = None,
) -> SolveResult:
    """Runs the gradient flow from u0, or from the L1 / TV solution when u0 is None."""
    return QRMSolver(problem, regularizer, config).solve(u0)


def stationarity_residual(
    u: np.ndarray,
    regularizer: AbstractRegularizer,
    problem: Problem,
    config: SolverConfig,
    dual: np.ndarray | None = None,
) -> float:
    h = regularizer.linear_term(u)
    return kkt_residual(u, u, h, regularizer, problem.operator, problem.f, config, dual=dual)


def theorem1_threshold(problem: Problem, regularizer: AbstractRegularizer) -> float:
    """2M/||f||^2: for lam above it, 0 is not a global minimizer of R + (lam/2)||Au - f||^2."""
    f_norm = problem.f_norm
    if f_norm == 0.0:
        raise ArgumentError("the lambda threshold is undefined for f = 0")
    return 2.0 * upper_bound_R(regularizer, problem.operator.input_shape) / f_norm**2


def verify_norm_monotonicity(
    problem: Problem,
    regularizer: AbstractRegularizer,
    config: SolverConfig,
    u0: np.ndarray | None = None,
) -> NormMonotonicityReport:
    """
    Runs the flow twice from rescaled copies of u0: case 1 with ||Au0|| = 1.5||f||,
    case 2 with ||Au0|| = 0.5||f||. An iteration is flagged when ||Au^k|| >= ||f||
    and ||u^k|| still grew by more than a relative 1e-9.
    """
    op = problem.operator
    base = l1_solve(problem, config).u_star if u0 is None else np.asarray(u0, dtype=np.float64)
    au_norm = float(np.linalg.norm(op.apply(base)))
    if au_norm == 0.0:
        raise DegenerateIterateError("A u0 = 0, the start point cannot be rescaled")

    rows: list[NormMonotonicityRow] = []
    results: dict[int, SolveResult] = {}
    for case, scale in CASE_SCALES.items():
        start = base * (scale * problem.f_norm / au_norm)
        result = qrm_solve(problem, regularizer, config, u0=start)
        results[case] = result
        prev_norm = None
        for record in result.trace:
            if prev_norm is None:
                delta_sign = 0
                flagged = False
            else:
                delta = record.u_norm - prev_norm
                delta_sign = int(np.sign(delta))
                flagged = record.au_minus_f >= 0.0 and delta > NORM_INCREASE_SLACK * prev_norm
            rows.append(NormMonotonicityRow(case, record.k, record.u_norm, delta_sign, record.au_minus_f, record.objective, flagged))
            prev_norm = record.u_norm

    report = NormMonotonicityReport(rows, results)
    for case in CASE_SCALES:
        logger.info(
            f"[norm-monotonicity][case {case}] {len(report.case_rows(case)) - 1} iterations, "
            f"{report.flag_count(case)} flagged, ||u|| grew over the first {report.leading_increases(case)}"
        )
    return report
