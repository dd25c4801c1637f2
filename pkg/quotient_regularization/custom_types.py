from __future__ import annotations

import math
from typing import TYPE_CHECKING, Any

import numpy as np

from quotient_regularization.errors import ArgumentError, DimensionError

if TYPE_CHECKING:
    from quotient_regularization.operator_abstract import AbstractOperator


class Status:
    CONVERGED = "Converged"
    MAX_ITERATIONS = "MaxIterations"
    DEGENERATE_ITERATE = "DegenerateIterate"


class RegularizerKind:
    L1_OVER_L2 = "l1_l2"
    L1_OVER_SK = "l1_sk"
    L1_OVER_LINF = "l1_linf"
    GRAD_L1_OVER_L2 = "grad_l1_l2"


class SolverConfig:
    """Parameters shared by the outer gradient-flow loop, the ADMM inner loops and the baselines.

    beta is 1/dt of the flow, rho the ADMM penalty, lam the fidelity weight.
    K only matters for the L1/S_K regularizer.
    """

    beta: float
    rho: float
    lam: float
    K: int | None
    eps: float
    inner_eps: float
    k_max: int
    j_max: int
    seed: int
    mu: float
    l1_j_max: int

    def __init__(
        self,
        beta: float = 1.0,
        rho: float = 10.0,
        lam: float = 1.0,
        K: int | None = None,
        eps: float = 1e-8,
        inner_eps: float | None = None,
        k_max: int = 100,
        j_max: int = 200,
        seed: int = 0,
        mu: float = 1.0,
        l1_j_max: int = 2000,
    ):
        self.beta = float(beta)
        self.rho = float(rho)
        self.lam = float(lam)
        self.K = None if K is None else int(K)
        self.eps = float(eps)
        self.inner_eps = self.eps if inner_eps is None else float(inner_eps)
        self.k_max = int(k_max)
        self.j_max = int(j_max)
        self.seed = int(seed)
        self.mu = float(mu)
        self.l1_j_max = int(l1_j_max)
        self._validate()

    def _validate(self) -> None:
        for name in ("beta", "rho", "lam", "eps", "inner_eps", "mu"):
            value = getattr(self, name)
            if not math.isfinite(value) or value <= 0.0:
                raise ArgumentError(f"{name} must be a finite positive number, got {value}")
        for name in ("k_max", "j_max", "l1_j_max"):
            if getattr(self, name) < 1:
                raise ArgumentError(f"{name} must be a positive integer, got {getattr(self, name)}")
        if self.K is not None and self.K < 1:
            raise ArgumentError(f"K must be at least 1, got {self.K}")
        if self.seed < 0:
            raise ArgumentError(f"seed must be unsigned, got {self.seed}")

    @property
    def kappa(self) -> float:
        return 1.0 / (self.beta + self.rho)

    def with_overrides(self, **overrides: Any) -> SolverConfig:
        """Returns a copy with some fields replaced. The original is left untouched."""
        fields = self.as_dict()
        fields.update(overrides)
        return SolverConfig(**fields)

    def as_dict(self) -> dict[str, Any]:
        return {
            "beta": self.beta,
            "rho": self.rho,
            "lam": self.lam,
            "K": self.K,
            "eps": self.eps,
            "inner_eps": self.inner_eps,
            "k_max": self.k_max,
            "j_max": self.j_max,
            "seed": self.seed,
            "mu": self.mu,
            "l1_j_max": self.l1_j_max,
        }

    def __repr__(self) -> str:
        return f"SolverConfig({', '.join(f'{k}={v}' for k, v in self.as_dict().items())})"


class Problem:
    """Measurement operator A together with the observed data f."""

    operator: AbstractOperator
    f: np.ndarray

    def __init__(self, operator: AbstractOperator, f: np.ndarray):
        f = np.asarray(f)
        if f.shape != operator.output_shape:
            raise DimensionError(f"data shape {f.shape} does not match operator output shape {operator.output_shape}")
        if not np.all(np.isfinite(f)):
            raise DimensionError("data f contains NaN or Inf entries")
        self.operator = operator
        self.f = f

    @property
    def f_norm(self) -> float:
        return float(np.linalg.norm(self.f))


class OuterLoopRecord:
    """One row of the per-outer-iteration trace."""

    CSV_HEADER = ["k", "G", "R", "fidelity", "u_norm", "Au_minus_f_norm", "rel_change", "inner_iters"]

    k: int
    objective: float
    ratio: float
    fidelity: float
    u_norm: float
    au_minus_f: float
    rel_change: float
    inner_iters: int

    def __init__(
        self,
        k: int,
        objective: float,
        ratio: float,
        fidelity: float,
        u_norm: float,
        au_minus_f: float,
        rel_change: float,
        inner_iters: int,
    ):
        self.k = k
        self.objective = objective
        self.ratio = ratio
        self.fidelity = fidelity
        self.u_norm = u_norm
        # ||Au||_2 - ||f||_2, the quantity that decides the sign of d||u||/dt
        self.au_minus_f = au_minus_f
        self.rel_change = rel_change
        self.inner_iters = inner_iters

    def as_row(self) -> list[Any]:
        return [
            self.k,
            self.objective,
            self.ratio,
            self.fidelity,
            self.u_norm,
            self.au_minus_f,
            self.rel_change,
            self.inner_iters,
        ]


class SolveResult:
    """Final iterate, trace and termination status of one solve."""

    u_star: np.ndarray
    trace: list[OuterLoopRecord]
    status: str
    stationarity: float | None
    message: str

    def __init__(
        self,
        u_star: np.ndarray,
        trace: list[OuterLoopRecord],
        status: str,
        stationarity: float | None = None,
        message: str = "",
    ):
        self.u_star = u_star
        self.trace = trace
        self.status = status
        self.stationarity = stationarity
        self.message = message

    @property
    def objective(self) -> float:
        return self.trace[-1].objective if self.trace else math.nan

    @property
    def iterations(self) -> int:
        return self.trace[-1].k if self.trace else 0


class AdmmState:
    """Inner ADMM iterates. eta is the scaled dual of the split constraint."""

    u: np.ndarray
    y: np.ndarray
    eta: np.ndarray
    j: int
    converged: bool
    primal_residual: float
    objective: float

    def __init__(
        self,
        u: np.ndarray,
        y: np.ndarray,
        eta: np.ndarray,
        j: int = 0,
        converged: bool = False,
        primal_residual: float = math.nan,
        objective: float = math.nan,
    ):
        if not np.all(np.isfinite(eta)):
            raise DimensionError("ADMM dual variable contains NaN or Inf entries")
        self.u = u
        self.y = y
        self.eta = eta
        self.j = j
        self.converged = converged
        # ||u - y|| (signal) or ||Du - y|| (image) at exit
        self.primal_residual = primal_residual
        # subproblem objective at the returned u
        self.objective = objective


class NormMonotonicityRow:
    """One outer iteration of a norm-monotonicity case."""

    CSV_HEADER = ["case", "k", "u_norm", "delta_u_norm_sign", "Au_minus_f_norm", "G", "flagged"]

    case: int
    k: int
    u_norm: float
    delta_sign: int
    au_minus_f: float
    objective: float
    flagged: bool

    def __init__(self, case: int, k: int, u_norm: float, delta_sign: int, au_minus_f: float, objective: float, flagged: bool):
        self.case = case
        self.k = k
        self.u_norm = u_norm
        # sign of ||u^k|| - ||u^{k-1}||; 0 at k = 0
        self.delta_sign = delta_sign
        self.au_minus_f = au_minus_f
        self.objective = objective
        self.flagged = flagged

    def as_row(self) -> list[Any]:
        return [self.case, self.k, self.u_norm, self.delta_sign, self.au_minus_f, self.objective, int(self.flagged)]


class NormMonotonicityReport:
    """Both cases of the ||u|| monotonicity check. Case 1 starts with ||Au0|| > ||f||, case 2 with ||Au0|| < ||f||."""

    rows: list[NormMonotonicityRow]
    results: dict[int, SolveResult]

    def __init__(self, rows: list[NormMonotonicityRow], results: dict[int, SolveResult]):
        self.rows = rows
        self.results = results

    def case_rows(self, case: int) -> list[NormMonotonicityRow]:
        return [r for r in self.rows if r.case == case]

    def flag_count(self, case: int) -> int:
        return sum(1 for r in self.case_rows(case) if r.flagged)

    def leading_increases(self, case: int) -> int:
        """Number of consecutive iterations, from k = 1, over which ||u^k|| grew."""
        count = 0
        for r in self.case_rows(case):
            if r.k == 0:
                continue
            if r.delta_sign <= 0:
                break
            count += 1
        return count


class RunOptions:
    """Command-line overrides shared by every command. None means "use the config file"."""

    seed: int | None
    trials: int | None
    jobs: int | None
    out_dir: str

    def __init__(self, seed: int | None = None, trials: int | None = None, jobs: int | None = None, out_dir: str = "out"):
        if seed is not None and seed < 0:
            raise ArgumentError(f"--seed must be unsigned, got {seed}")
        if trials is not None and trials < 1:
            raise ArgumentError(f"--trials must be at least 1, got {trials}")
        if jobs is not None and jobs < 1:
            raise ArgumentError(f"--jobs must be at least 1, got {jobs}")
        self.seed = seed
        self.trials = trials
        self.jobs = jobs
        self.out_dir = out_dir
