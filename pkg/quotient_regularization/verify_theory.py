"""
Empirical checks of the theory behind the gradient flow: objective decay for every
regularizer, the two-case ||u|| monotonicity experiment, the property suite and the
stationarity residual of every final iterate.
"""

import logging
import time
from typing import Any

from quotient_regularization.bench_mri import MriCondition, run_mri_condition
from quotient_regularization.bench_signal import SignalTrialRunner, build_signal_instance, parse_method
from quotient_regularization.config import Config
from quotient_regularization.custom_types import NormMonotonicityRow, OuterLoopRecord, RunOptions, SolveResult
from quotient_regularization.datagen import shepp_logan
from quotient_regularization.helper import ExperimentHelper
from quotient_regularization.objective import objective_rose
from quotient_regularization.properties import PropertyOutcome, PropertySuite
from quotient_regularization.qrm import verify_norm_monotonicity
from quotient_regularization.storage import Storage

logger = logging.getLogger(__name__)

SIGNAL_METHODS = ["qrm_l1_l2", "qrm_l1_sk"]
DECAY_HEADER = ["regularizer", "k", "G", "rel_change", "descent_violation"]
STATIONARITY_HEADER = ["regularizer", "status", "iterations", "G", "stationarity"]


def descent_violations(trace: list[OuterLoopRecord]) -> list[int]:
    """Iterations k >= 2 at which G rose by more than the relative slack."""
    return [cur.k for prev, cur in zip(trace, trace[1:], strict=False) if objective_rose(prev, cur)]


def decay_rows(name: str, trace: list[OuterLoopRecord]) -> list[list[Any]]:
    flagged = set(descent_violations(trace))
    return [[name, r.k, r.objective, r.rel_change, int(r.k in flagged)] for r in trace]


def cmd_verify_theory(options: RunOptions) -> int:
    section = "verify_theory"
    n = Config.get_value(section, "n", 512, int)
    s = Config.get_value(section, "s", 130, int)
    m = Config.get_value(section, "m", 300, int)
    sigma = float(Config.get_value(section, "sigma", 0.1, (int, float)))
    side = Config.get_value(section, "image_size", 64, int)
    lines = Config.get_value(section, "image_lines", 10, int)
    image_sigma = float(Config.get_value(section, "image_sigma", 0.01, (int, float)))
    cases = Config.get_value(section, "property_cases", 1000, int)
    if not 1 <= s <= n or m < 1:
        Config.fail_at(f"need 1 <= s <= n and m >= 1, got n={n}, s={s}, m={m}", section)
    if side < 32 or lines < 1:
        Config.fail_at(f"need image_size >= 32 and image_lines >= 1, got {side} and {lines}", section)
    if cases < 1:
        Config.fail_at(f"property_cases must be positive, got {cases}", section, "property_cases")

    seed = options.seed if options.seed is not None else int(Config.get_solver_settings(section)["seed"])
    for method in SIGNAL_METHODS:
        _, kind, K = parse_method(method)
        if K is None and kind == "l1_sk" and Config.get_solver_settings(section, method)["K"] is None:
            Config.fail_at(f"method '{method}' needs solver key 'K'", section)
    settings = {method: Config.get_solver_settings(section, method) for method in ["l1", *SIGNAL_METHODS]}
    storage = Storage(f"{options.out_dir}/verify_theory", ExperimentHelper.config_hash(), seed)
    start = time.time()

    # objective decay on one signal instance per signal regularizer, plus the image problem
    instance = build_signal_instance(n, s, m, sigma, seed)
    runner = SignalTrialRunner(instance, section, settings)
    finals: dict[str, SolveResult] = {}
    decay: list[list[Any]] = []
    for method in SIGNAL_METHODS:
        outcome = runner.run(method)
        finals[method] = outcome.result
        decay += decay_rows(method, outcome.result.trace)

    image = run_mri_condition(shepp_logan(side, side), MriCondition(lines, image_sigma, seed), section, Config.get_solver_settings(section, "qrm_grad_l1_l2"))
    finals["qrm_grad_l1_l2"] = image.results["qrm"]
    decay += decay_rows("qrm_grad_l1_l2", image.results["qrm"].trace)

    for name, result in finals.items():
        storage.write_trace(f"traces/{name}.csv", result.trace)
        violations = descent_violations(result.trace)
        if violations:
            logger.warning(f"[verify-theory][{name}] G rose at k={violations}")
        else:
            logger.info(f"[verify-theory][{name}] G non-increasing over {result.iterations} iterations")
    storage.write_csv("objective_decay.csv", DECAY_HEADER, decay)

    # ||u|| monotonicity: case 1 must never grow while ||Au|| >= ||f||, case 2 grows
    mono_config = runner.config_for("qrm_l1_l2")
    regularizer = runner.regularizer_for("qrm_l1_l2", mono_config)
    assert regularizer is not None
    report = verify_norm_monotonicity(instance.problem, regularizer, mono_config, u0=runner.l1_start().u_star)
    storage.write_csv("norm_monotonicity.csv", NormMonotonicityRow.CSV_HEADER, [r.as_row() for r in report.rows])
    if report.flag_count(1):
        logger.warning(f"[verify-theory] case 1 has {report.flag_count(1)} iterations where ||u|| grew with ||Au|| >= ||f||")
    if report.leading_increases(2) < 10:
        logger.warning(f"[verify-theory] case 2: ||u|| grew over only {report.leading_increases(2)} leading iterations")

    outcomes = PropertySuite(cases=cases, seed=seed).run()
    storage.write_csv("properties.csv", PropertyOutcome.CSV_HEADER, [o.as_row() for o in outcomes])

    storage.write_csv(
        "stationarity.csv",
        STATIONARITY_HEADER,
        [[name, r.status, r.iterations, r.objective, r.stationarity] for name, r in finals.items()],
    )
    for name, r in finals.items():
        logger.info(f"[verify-theory][{name}] {r.status} after {r.iterations} iterations, stationarity={r.stationarity}")

    failed = sum(1 for o in outcomes if not o.passed)
    logger.info(f"[verify-theory] finished in {ExperimentHelper.format_duration(time.time() - start)}, outputs in '{storage.out_dir}'")
    return 1 if failed else 0
