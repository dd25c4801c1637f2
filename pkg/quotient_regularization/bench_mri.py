"""
MRI reconstruction from radial k-space lines: the TV baseline and the gradient flow
for ||Du||_1/||Du||_2, started from the TV result.
"""

import logging
import os
import time
from typing import Any

import numpy as np

from quotient_regularization.baselines import l1_solve
from quotient_regularization.config import Config
from quotient_regularization.custom_types import Problem, RegularizerKind, RunOptions, SolveResult
from quotient_regularization.datagen import add_noise, shepp_logan
from quotient_regularization.helper import ExperimentHelper
from quotient_regularization.metrics import capped_psnr, re_psnr
from quotient_regularization.operator_fourier import RadialFourierOperator
from quotient_regularization.qrm import qrm_solve, theorem1_threshold
from quotient_regularization.regularizer import make_regularizer
from quotient_regularization.storage import Storage
from quotient_regularization.trial_pool import TrialPool

logger = logging.getLogger(__name__)

MRI_METHODS = ("tv", "qrm")
METRICS_HEADER = ["lines", "sigma", "method", "RE", "PSNR", "status", "iterations", "stationarity", "sampling_fraction", "lambda"]


class MriCondition:
    lines: int
    sigma: float
    seed: int

    def __init__(self, lines: int, sigma: float, seed: int):
        self.lines = lines
        self.sigma = sigma
        self.seed = seed

    @property
    def name(self) -> str:
        return f"lines{self.lines}_sigma{self.sigma:g}"


class MriOutcome:
    condition: MriCondition
    operator: RadialFourierOperator
    results: dict[str, SolveResult]
    scores: dict[str, tuple[float, float]]
    lam: float

    def __init__(
        self,
        condition: MriCondition,
        operator: RadialFourierOperator,
        results: dict[str, SolveResult],
        scores: dict[str, tuple[float, float]],
        lam: float,
    ):
        self.condition = condition
        self.operator = operator
        self.results = results
        self.scores = scores
        self.lam = lam


def load_phantom(section: str) -> np.ndarray:
    """The Shepp-Logan phantom at the configured size, or a PGM image (e.g. a FORBILD render) given by path."""
    phantom = Config.get_value(section, "phantom", "shepp_logan", str)
    if phantom == "shepp_logan":
        height = Config.get_value(section, "height", 256, int)
        width = Config.get_value(section, "width", 256, int)
        if height < 32 or width < 32:
            Config.fail_at(f"phantom must be at least 32x32, got {height}x{width}", section)
        return shepp_logan(height, width)
    path = phantom
    if not os.path.isabs(path):
        project_root_dir = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
        path = os.path.join(project_root_dir, path)
    if not os.path.isfile(path):
        Config.fail_at(f"phantom image '{phantom}' not found", section, "phantom")
    image = Storage.read_pgm(path)
    logger.info(f"[phantom] loaded {image.shape[0]}x{image.shape[1]} image from '{path}'")
    return image


def run_mri_condition(truth: np.ndarray, condition: MriCondition, section: str, settings: dict[str, Any]) -> MriOutcome:
    height, width = truth.shape
    operator = RadialFourierOperator.from_lines(height, width, condition.lines)
    f = add_noise(operator.apply(truth), condition.sigma, condition.seed)
    problem = Problem(operator, f)
    config = ExperimentHelper.solver_config(settings, problem.f_norm, section, seed=condition.seed)
    regularizer = make_regularizer(RegularizerKind.GRAD_L1_OVER_L2)

    threshold = theorem1_threshold(problem, regularizer)
    if config.lam <= threshold:
        logger.warning(f"[mri][{condition.name}] lambda={config.lam:.6g} is not above 2M/||f||^2={threshold:.6g}")

    tv = l1_solve(problem, config)
    proposed = qrm_solve(problem, regularizer, config, u0=tv.u_star)
    results = {"tv": tv, "qrm": proposed}
    scores = {method: re_psnr(result.u_star, truth) for method, result in results.items()}
    logger.info(
        f"[mri][{condition.name}] sampling={operator.sampling_fraction:.4f} "
        + " ".join(f"{method}: RE={re:.4%} PSNR={psnr:.2f}dB" for method, (re, psnr) in scores.items())
    )
    return MriOutcome(condition, operator, results, scores, config.lam)


def write_outcome(storage: Storage, truth: np.ndarray, outcome: MriOutcome, with_traces: bool) -> list[list[Any]]:
    """Mask, reconstructions and difference maps of one condition; returns its metrics rows."""
    name = outcome.condition.name
    storage.write_pbm(f"{name}/mask.pbm", outcome.operator.mask)
    # one symmetric range for both difference maps of a condition keeps them comparable
    spread = max(float(np.abs(r.u_star - truth).max()) for r in outcome.results.values())
    spread = spread if spread > 0 else 1.0
    rows = []
    for method, result in outcome.results.items():
        storage.write_pgm(f"{name}/{method}_recon.pgm", result.u_star, lo=0.0, hi=1.0)
        storage.write_pgm(f"{name}/{method}_diff.pgm", result.u_star - truth, lo=-spread, hi=spread)
        if with_traces:
            storage.write_trace(f"{name}/{method}_trace.csv", result.trace)
        re, psnr = outcome.scores[method]
        rows.append(
            [
                outcome.condition.lines,
                outcome.condition.sigma,
                method,
                re,
                capped_psnr(psnr),
                result.status,
                result.iterations,
                result.stationarity,
                outcome.operator.sampling_fraction,
                outcome.lam,
            ]
        )
    return rows


def _run_seed(section: str, options: RunOptions) -> int:
    return options.seed if options.seed is not None else int(Config.get_solver_settings(section)["seed"])


def cmd_recover_image(options: RunOptions) -> int:
    section = "recover_image"
    truth = load_phantom(section)
    lines = Config.get_value(section, "lines", 10, int)
    sigma = float(Config.get_value(section, "sigma", 0.01, (int, float)))
    if lines < 1 or sigma < 0:
        Config.fail_at(f"need lines >= 1 and sigma >= 0, got lines={lines}, sigma={sigma}", section)
    seed = _run_seed(section, options)
    settings = Config.get_solver_settings(section)
    storage = Storage(f"{options.out_dir}/recover_image", ExperimentHelper.config_hash(), seed)

    start = time.time()
    outcome = run_mri_condition(truth, MriCondition(lines, sigma, seed), section, settings)
    storage.write_pgm("truth.pgm", truth, lo=0.0, hi=1.0)
    storage.write_csv("metrics.csv", METRICS_HEADER, write_outcome(storage, truth, outcome, with_traces=True))
    logger.info(f"[recover-image] finished in {ExperimentHelper.format_duration(time.time() - start)}, outputs in '{storage.out_dir}'")
    return 0


def cmd_bench_mri(options: RunOptions) -> int:
    """Every (lines, sigma) pair: TV baseline and gradient flow, with images, masks and RE/PSNR."""
    section = "bench_mri"
    truth = load_phantom(section)
    lines_values = Config.get_value(section, "lines", [7, 10, 13], list)
    sigma_values = Config.get_value(section, "sigmas", [0.01, 0.05], list)
    if not all(isinstance(v, int) and not isinstance(v, bool) and v >= 1 for v in lines_values):
        Config.fail_at(f"lines must be positive integers, got {lines_values!r}", section, "lines")
    if not all(isinstance(v, int | float) and not isinstance(v, bool) and v >= 0 for v in sigma_values):
        Config.fail_at(f"sigmas must be non-negative numbers, got {sigma_values!r}", section, "sigmas")
    seed = _run_seed(section, options)
    settings = Config.get_solver_settings(section)
    storage = Storage(f"{options.out_dir}/bench_mri", ExperimentHelper.config_hash(), seed)

    # noise of each condition gets its own seed
    conditions = [
        MriCondition(lines, float(sigma), ExperimentHelper.trial_seed(seed, index))
        for index, (lines, sigma) in enumerate((lines, sigma) for lines in lines_values for sigma in sigma_values)
    ]

    start = time.time()
    outcomes = TrialPool(options.jobs).map(lambda c: run_mri_condition(truth, c, section, settings), conditions, tag="bench-mri")

    storage.write_pgm("truth.pgm", truth, lo=0.0, hi=1.0)
    rows = []
    for outcome in outcomes:
        rows.extend(write_outcome(storage, truth, outcome, with_traces=False))
    storage.write_csv("table3.csv", METRICS_HEADER, rows)
    logger.info(f"[bench-mri] {len(outcomes)} conditions in {ExperimentHelper.format_duration(time.time() - start)}, outputs in '{storage.out_dir}'")
    return 0
