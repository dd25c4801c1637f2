"""
Sparse-signal experiments: single recoveries, the K sweep and the method comparison.

Every trial draws its own Gaussian matrix, sparse signal and noise from seed + trial,
solves with each method and scores the result against the oracle least-squares error
on the true support.
"""

import logging
import math
import time
from typing import Any

import numpy as np

from quotient_regularization.baselines import dca_solve, l1_solve
from quotient_regularization.config import Config
from quotient_regularization.custom_types import Problem, RegularizerKind, RunOptions, SolverConfig, SolveResult, Status
from quotient_regularization.datagen import add_noise, gen_gaussian_matrix, gen_sparse_signal
from quotient_regularization.errors import ArgumentError
from quotient_regularization.helper import ExperimentHelper
from quotient_regularization.metrics import mse, oracle_mse
from quotient_regularization.qrm import qrm_solve, theorem1_threshold
from quotient_regularization.regularizer import make_regularizer
from quotient_regularization.regularizer_abstract import AbstractRegularizer
from quotient_regularization.storage import Storage
from quotient_regularization.trial_pool import TrialPool

logger = logging.getLogger(__name__)

TABLE2_METHODS = ["l1", "dca_l1_l2", "dca_l1_sk", "qrm_l1_l2", "qrm_l1_sk"]
TRIAL_HEADER = ["m", "trial", "method", "mse", "status", "iterations", "stationarity", "lambda"]
THEOREM1_HEADER = ["m", "trial", "method", "lambda", "threshold", "lambda_ok", "u_star_nonzero"]


class SignalInstance:
    """One seeded trial: A, f = A u + noise, the true u and its support."""

    problem: Problem
    u_true: np.ndarray
    support: np.ndarray
    sigma: float
    seed: int

    def __init__(self, problem: Problem, u_true: np.ndarray, sigma: float, seed: int):
        self.problem = problem
        self.u_true = u_true
        self.support = np.flatnonzero(u_true)
        self.sigma = sigma
        self.seed = seed

    def oracle(self) -> float:
        return oracle_mse(self.problem.operator, self.support, self.sigma)


class MethodOutcome:
    method: str
    result: SolveResult
    mse: float
    lam: float
    threshold: float | None

    def __init__(self, method: str, result: SolveResult, mse: float, lam: float, threshold: float | None):
        self.method = method
        self.result = result
        self.mse = mse
        self.lam = lam
        self.threshold = threshold


class TrialOutcome:
    m: int
    trial: int
    oracle: float
    methods: dict[str, MethodOutcome]

    def __init__(self, m: int, trial: int, oracle: float, methods: dict[str, MethodOutcome]):
        self.m = m
        self.trial = trial
        self.oracle = oracle
        self.methods = methods


def build_signal_instance(n: int, s: int, m: int, sigma: float, seed: int) -> SignalInstance:
    operator = gen_gaussian_matrix(m, n, seed)
    u_true = gen_sparse_signal(n, s, seed)
    f = add_noise(operator.apply(u_true), sigma, seed)
    return SignalInstance(Problem(operator, f), u_true, sigma, seed)


def parse_method(name: str) -> tuple[str, str | None, int | None]:
    """
    Method name -> (solver, regularizer kind, K).

    "l1", "qrm_<kind>", "dca_<kind>" with kind in l1_l2 / l1_sk / l1_linf, and
    "qrm_l1_sk_K<K>" for a fixed K.
    """
    if name == "l1":
        return "l1", None, None
    solver, _, rest = name.partition("_")
    if solver not in ("qrm", "dca") or not rest:
        raise ArgumentError(f"unknown method '{name}'")
    if rest.startswith(f"{RegularizerKind.L1_OVER_SK}_K"):
        k_text = rest[len(RegularizerKind.L1_OVER_SK) + 2 :]
        if not k_text.isdigit():
            raise ArgumentError(f"unknown method '{name}'")
        return solver, RegularizerKind.L1_OVER_SK, int(k_text)
    if rest not in (RegularizerKind.L1_OVER_L2, RegularizerKind.L1_OVER_SK, RegularizerKind.L1_OVER_LINF):
        raise ArgumentError(f"unknown method '{name}'")
    return solver, rest, None


class SignalTrialRunner:
    """Runs a list of methods on one instance. Every QRM and DCA method starts from the instance's "l1" solution."""

    def __init__(self, instance: SignalInstance, section: str, settings: dict[str, dict[str, Any]]):
        self.instance = instance
        self.section = section
        self.settings = settings
        self._l1_result: SolveResult | None = None

    def config_for(self, method: str) -> SolverConfig:
        if method not in self.settings:
            self.settings[method] = Config.get_solver_settings(self.section, method)
        return ExperimentHelper.solver_config(self.settings[method], self.instance.problem.f_norm, self.section, seed=self.instance.seed)

    def l1_start(self) -> SolveResult:
        """The L1 baseline under the "l1" method settings, solved once per instance."""
        if self._l1_result is None:
            self._l1_result = l1_solve(self.instance.problem, self.config_for("l1"))
        return self._l1_result

    def regularizer_for(self, method: str, config: SolverConfig) -> AbstractRegularizer | None:
        _, kind, K = parse_method(method)
        if kind is None:
            return None
        if kind == RegularizerKind.L1_OVER_SK and K is None:
            K = config.K
        return make_regularizer(kind, K)

    def run(self, method: str) -> MethodOutcome:
        solver, _, _ = parse_method(method)
        config = self.config_for(method)
        problem = self.instance.problem
        regularizer = self.regularizer_for(method, config)

        if solver == "l1" or regularizer is None:
            result = self.l1_start()
            threshold = None
        else:
            u0 = self.l1_start().u_star
            if solver == "qrm":
                result = qrm_solve(problem, regularizer, config, u0=u0)
            else:
                result = dca_solve(problem, regularizer, config, u0=u0)
            threshold = theorem1_threshold(problem, regularizer)
        return MethodOutcome(method, result, mse(result.u_star, self.instance.u_true), config.lam, threshold)


def run_signal_sweep(
    tag: str,
    section: str,
    methods: list[str],
    m_values: list[int],
    n: int,
    s: int,
    sigma: float,
    trials: int,
    seed: int,
    jobs: int | None,
) -> list[TrialOutcome]:
    """All (m, trial) pairs, run on the trial pool. Outcomes come back ordered by m, then trial."""
    for method in methods:
        try:
            _, kind, K = parse_method(method)
        except ArgumentError as e:
            Config.fail_at(str(e), section)
        if kind == RegularizerKind.L1_OVER_SK and K is None and Config.get_solver_settings(section, method)["K"] is None:
            Config.fail_at(f"method '{method}' needs solver key 'K'", section)
    settings = {method: Config.get_solver_settings(section, method) for method in ["l1", *methods]}

    def run_trial(task: tuple[int, int]) -> TrialOutcome:
        m, trial = task
        instance = build_signal_instance(n, s, m, sigma, ExperimentHelper.trial_seed(seed, trial))
        runner = SignalTrialRunner(instance, section, settings)
        outcomes = {method: runner.run(method) for method in methods}
        logger.debug(f"[{tag}][m={m}][trial={trial}] " + " ".join(f"{k}={v.mse:.4f}" for k, v in outcomes.items()))
        return TrialOutcome(m, trial, instance.oracle(), outcomes)

    tasks = [(m, trial) for m in m_values for trial in range(trials)]
    return TrialPool(jobs).map(run_trial, tasks, tag=tag)


def mean_and_se(values: list[float]) -> tuple[float, float]:
    arr = np.asarray(values, dtype=np.float64)
    mean = float(arr.mean())
    if arr.size < 2:
        return mean, 0.0
    return mean, float(arr.std(ddof=1) / math.sqrt(arr.size))


def table_rows(outcomes: list[TrialOutcome], rows: list[tuple[str, str]], m_values: list[int]) -> list[list[Any]]:
    """Wide table: one row per (label, method), a mean and a standard-error column per m. method "oracle" uses the oracle MSE."""
    table = []
    for label, method in rows:
        row: list[Any] = [label]
        for m in m_values:
            cell = [o.oracle if method == "oracle" else o.methods[method].mse for o in outcomes if o.m == m]
            mean, se = mean_and_se(cell)
            row.extend([mean, se])
        table.append(row)
    return table


def table_header(m_values: list[int]) -> list[str]:
    header = ["method"]
    for m in m_values:
        header.extend([f"m={m}", f"m={m}_se"])
    return header


def trial_rows(outcomes: list[TrialOutcome]) -> list[list[Any]]:
    rows = []
    for o in outcomes:
        for method, out in o.methods.items():
            rows.append([o.m, o.trial, method, out.mse, out.result.status, out.result.iterations, out.result.stationarity, out.lam])
        rows.append([o.m, o.trial, "oracle", o.oracle, "", "", "", ""])
    return rows


def theorem1_rows(outcomes: list[TrialOutcome]) -> list[list[Any]]:
    rows = []
    for o in outcomes:
        for method, out in o.methods.items():
            if out.threshold is None:
                continue
            nonzero = bool(np.any(out.result.u_star != 0.0))
            rows.append([o.m, o.trial, method, out.lam, out.threshold, int(out.lam > out.threshold), int(nonzero)])
    return rows


def log_summary(tag: str, outcomes: list[TrialOutcome], m_values: list[int]) -> None:
    for m in m_values:
        at_m = [o for o in outcomes if o.m == m]
        means = {method: mean_and_se([o.methods[method].mse for o in at_m])[0] for method in at_m[0].methods}
        oracle = mean_and_se([o.oracle for o in at_m])[0]
        logger.info(f"[{tag}][m={m}] oracle={oracle:.4f} " + " ".join(f"{k}={v:.4f}" for k, v in means.items()))

    degenerate = sum(1 for o in outcomes for out in o.methods.values() if out.result.status == Status.DEGENERATE_ITERATE)
    if degenerate:
        logger.warning(f"[{tag}] {degenerate} solves ended on a degenerate iterate")
    below = sum(1 for o in outcomes for out in o.methods.values() if out.threshold is not None and out.lam <= out.threshold)
    if below:
        logger.warning(f"[{tag}] lambda is at or below 2M/||f||^2 in {below} solves, zero is not excluded as a minimizer there")


def _run_seed(section: str, options: RunOptions) -> int:
    return options.seed if options.seed is not None else int(Config.get_solver_settings(section)["seed"])


def _trials(section: str, options: RunOptions, default: int) -> int:
    return options.trials if options.trials is not None else int(Config.get_value(section, "trials", default, int))


def _sizes(section: str) -> tuple[int, int, float]:
    n = Config.get_value(section, "n", 512, int)
    s = Config.get_value(section, "s", 130, int)
    sigma = float(Config.get_value(section, "sigma", 0.1, (int, float)))
    if not 1 <= s <= n:
        Config.fail_at(f"sparsity s={s} must lie in [1, n={n}]", section, "s")
    if sigma < 0:
        Config.fail_at(f"sigma must be non-negative, got {sigma}", section, "sigma")
    return n, s, sigma


def _m_values(section: str, default: list[int]) -> list[int]:
    values = Config.get_value(section, "m_values", default, list)
    if not values or not all(isinstance(m, int) and not isinstance(m, bool) and m >= 1 for m in values):
        Config.fail_at(f"m_values must be a list of positive integers, got {values!r}", section, "m_values")
    return values


def cmd_recover_signal(options: RunOptions) -> int:
    section = "recover_signal"
    n, s, sigma = _sizes(section)
    m = Config.get_value(section, "m", 360, int)
    method = Config.get_value(section, "method", "qrm_l1_sk", str)
    seed = _run_seed(section, options)
    trials = _trials(section, options, 1)
    storage = Storage(f"{options.out_dir}/recover_signal", ExperimentHelper.config_hash(), seed)

    start = time.time()
    outcomes = run_signal_sweep("recover-signal", section, [method], [m], n, s, sigma, trials, seed, options.jobs)

    metrics = []
    for o in outcomes:
        out = o.methods[method]
        prefix = f"trial_{o.trial:03d}"
        instance_seed = ExperimentHelper.trial_seed(seed, o.trial)
        storage.write_vector(f"{prefix}/truth.csv", gen_sparse_signal(n, s, instance_seed))
        storage.write_vector(f"{prefix}/solution.csv", out.result.u_star)
        storage.write_trace(f"{prefix}/trace.csv", out.result.trace)
        if out.threshold is not None and out.lam <= out.threshold:
            logger.warning(f"[recover-signal][trial={o.trial}] lambda={out.lam:.6g} is not above 2M/||f||^2={out.threshold:.6g}")
        metrics.append(
            [
                o.trial,
                method,
                out.mse,
                o.oracle,
                out.result.status,
                out.result.iterations,
                out.result.stationarity,
                out.lam,
                out.threshold,
                int(np.count_nonzero(out.result.u_star)),
            ]
        )
        logger.info(f"[recover-signal][trial={o.trial}] {method}: mse={out.mse:.4f} oracle={o.oracle:.4f} status={out.result.status}")
    storage.write_csv(
        "metrics.csv",
        ["trial", "method", "mse", "oracle_mse", "status", "iterations", "stationarity", "lambda", "threshold", "nonzeros"],
        metrics,
    )
    logger.info(f"[recover-signal] finished in {ExperimentHelper.format_duration(time.time() - start)}, outputs in '{storage.out_dir}'")
    return 0


def cmd_bench_table1(options: RunOptions) -> int:
    """Effect of K: baseline, L1/S_K for each K, and L1/L2 standing in for K = n."""
    section = "bench_table1"
    n, s, sigma = _sizes(section)
    m_values = _m_values(section, list(range(250, 361, 10)))
    k_values = Config.get_value(section, "K_values", [10, 100, 150], list)
    if not k_values or not all(isinstance(k, int) and not isinstance(k, bool) and 1 <= k <= n for k in k_values):
        Config.fail_at(f"K_values must be integers in [1, n={n}], got {k_values!r}", section, "K_values")
    seed = _run_seed(section, options)
    trials = _trials(section, options, 20)
    storage = Storage(f"{options.out_dir}/bench_table1", ExperimentHelper.config_hash(), seed)

    rows = [("baseline", "l1")] + [(f"K={k}", f"qrm_l1_sk_K{k}") for k in k_values] + [("K=n", "qrm_l1_l2")]
    methods = [method for _, method in rows]

    start = time.time()
    outcomes = run_signal_sweep("bench-table1", section, methods, m_values, n, s, sigma, trials, seed, options.jobs)
    log_summary("bench-table1", outcomes, m_values)

    storage.write_csv("table1.csv", table_header(m_values), table_rows(outcomes, rows + [("oracle", "oracle")], m_values))
    storage.write_csv("trials.csv", TRIAL_HEADER, trial_rows(outcomes))
    logger.info(f"[bench-table1] {len(outcomes)} trials in {ExperimentHelper.format_duration(time.time() - start)}, outputs in '{storage.out_dir}'")
    return 0


def cmd_bench_table2(options: RunOptions) -> int:
    """L1 baseline, DCA and the gradient flow for L1/L2 and L1/S_K, plus the oracle and the lambda threshold ledger."""
    section = "bench_table2"
    n, s, sigma = _sizes(section)
    m_values = _m_values(section, list(range(240, 361, 20)))
    methods = Config.get_value(section, "methods", TABLE2_METHODS, list)
    seed = _run_seed(section, options)
    trials = _trials(section, options, 20)
    storage = Storage(f"{options.out_dir}/bench_table2", ExperimentHelper.config_hash(), seed)

    start = time.time()
    outcomes = run_signal_sweep("bench-table2", section, methods, m_values, n, s, sigma, trials, seed, options.jobs)
    log_summary("bench-table2", outcomes, m_values)

    rows = [(method, method) for method in methods] + [("oracle", "oracle")]
    storage.write_csv("table2.csv", table_header(m_values), table_rows(outcomes, rows, m_values))
    storage.write_csv("trials.csv", TRIAL_HEADER, trial_rows(outcomes))
    ledger = theorem1_rows(outcomes)
    storage.write_csv("theorem1.csv", THEOREM1_HEADER, ledger)
    violations = sum(1 for row in ledger if not row[5] or not row[6])
    if violations:
        logger.warning(f"[bench-table2] {violations} instances violate the lambda threshold or returned u* = 0")
    logger.info(f"[bench-table2] {len(outcomes)} trials in {ExperimentHelper.format_duration(time.time() - start)}, outputs in '{storage.out_dir}'")
    return 0
