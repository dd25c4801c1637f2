"""
Randomized checks of the algebraic facts the solvers rely on: the subgradient
identities of one-homogeneous functionals, operator adjoints, the shrink prox and
the two fast linear solves against dense references.
"""

import logging
import math
import time
from collections.abc import Callable

import numpy as np

from quotient_regularization.admm import shrink, woodbury_solve
from quotient_regularization.datagen import Stream, make_rng
from quotient_regularization.errors import ArgumentError
from quotient_regularization.gradient import grad, grad_adjoint
from quotient_regularization.helper import ExperimentHelper
from quotient_regularization.operator_abstract import AbstractOperator
from quotient_regularization.operator_dense import DenseOperator
from quotient_regularization.operator_fourier import RadialFourierOperator, symmetrize_mask
from quotient_regularization.regularizer import make_regularizer
from quotient_regularization.regularizer_abstract import AbstractRegularizer
from quotient_regularization.regularizer_l1sk import L1OverSK

logger = logging.getLogger(__name__)

IDENTITY_TOL = 1e-12
ADJOINT_TOL = 1e-10
WOODBURY_TOL = 1e-10
SPECTRAL_TOL = 1e-9
SPECTRAL_SIDE = 8


class PropertyOutcome:
    CSV_HEADER = ["property", "cases", "failures", "worst_error", "tolerance", "passed"]

    name: str
    cases: int
    failures: int
    worst_error: float
    tolerance: float

    def __init__(self, name: str, cases: int, failures: int, worst_error: float, tolerance: float):
        self.name = name
        self.cases = cases
        self.failures = failures
        self.worst_error = worst_error
        self.tolerance = tolerance

    @property
    def passed(self) -> bool:
        return self.failures == 0

    def as_row(self) -> list:
        return [self.name, self.cases, self.failures, self.worst_error, self.tolerance, int(self.passed)]


def _relative(a: float, b: float) -> float:
    return abs(a - b) / max(abs(a), abs(b), 1.0)


class PropertySuite:
    """
    Each check draws `cases` random instances and records the worst scaled error.
    An instance fails when its error exceeds the tolerance of the check.
    """

    def __init__(self, cases: int = 1000, seed: int = 0):
        if cases < 1:
            raise ArgumentError(f"cases must be at least 1, got {cases}")
        self.cases = cases
        self.seed = seed
        self.regularizers: list[AbstractRegularizer] = [
            make_regularizer("l1_l2"),
            make_regularizer("l1_sk", K=3),
            make_regularizer("l1_linf"),
            make_regularizer("grad_l1_l2"),
        ]

    def _rng(self, offset: int) -> np.random.Generator:
        return make_rng(ExperimentHelper.trial_seed(self.seed, offset), Stream.PROPERTIES)

    @staticmethod
    def _draw(rng: np.random.Generator, regularizer: AbstractRegularizer) -> np.ndarray:
        """A random point with some exact zeros, so sign(0) branches are exercised."""
        if regularizer.domain == "image":
            shape: tuple[int, ...] = (int(rng.integers(4, 13)), int(rng.integers(4, 13)))
        else:
            shape = (int(rng.integers(5, 41)),)
        u = rng.standard_normal(shape)
        u[rng.random(shape) < 0.3] = 0.0
        if not np.any(u):
            u.flat[0] = 1.0
        return u

    def _run(self, name: str, tolerance: float, offset: int, case: Callable[[np.random.Generator], float]) -> PropertyOutcome:
        rng = self._rng(offset)
        failures = 0
        worst = 0.0
        for _ in range(self.cases):
            error = case(rng)
            worst = max(worst, error)
            if not error <= tolerance:
                failures += 1
        outcome = PropertyOutcome(name, self.cases, failures, worst, tolerance)
        level = logging.DEBUG if outcome.passed else logging.WARNING
        logger.log(level, f"[properties][{name}] {failures}/{self.cases} failures, worst error {worst:.3e}")
        return outcome

    def subgradient_identity(self, reg: AbstractRegularizer) -> PropertyOutcome:
        """<p, u> = J(u) and <q, u> = H(u)."""

        def case(rng: np.random.Generator) -> float:
            u = self._draw(rng, reg)
            p, q = reg.subgrad_J(u), reg.subgrad_H(u)
            return max(_relative(float(np.vdot(p, u)), reg.J(u)), _relative(float(np.vdot(q, u)), reg.H(u)))

        return self._run(f"subgradient_identity[{reg.name}]", IDENTITY_TOL, 1, case)

    def subgradient_inequality(self, reg: AbstractRegularizer) -> PropertyOutcome:
        """J(v) >= <p(u), v> and H(v) >= <q(u), v>; error is the violation over ||v||."""

        def case(rng: np.random.Generator) -> float:
            u = self._draw(rng, reg)
            v = rng.standard_normal(u.shape)
            scale = max(float(np.linalg.norm(v)), 1.0)
            gap_j = float(np.vdot(reg.subgrad_J(u), v)) - reg.J(v)
            gap_h = float(np.vdot(reg.subgrad_H(u), v)) - reg.H(v)
            return max(gap_j, gap_h, 0.0) / scale

        return self._run(f"subgradient_inequality[{reg.name}]", IDENTITY_TOL, 2, case)

    def homogeneity(self, reg: AbstractRegularizer) -> PropertyOutcome:
        """J(a u) = |a| J(u) and H(a u) = |a| H(u) for a in [-10, 10]."""

        def case(rng: np.random.Generator) -> float:
            u = self._draw(rng, reg)
            a = float(rng.uniform(-10.0, 10.0))
            return max(_relative(reg.J(a * u), abs(a) * reg.J(u)), _relative(reg.H(a * u), abs(a) * reg.H(u)))

        return self._run(f"homogeneity[{reg.name}]", IDENTITY_TOL, 3, case)

    def scale_invariance(self, reg: AbstractRegularizer) -> PropertyOutcome:
        """R(a u) = R(u) for a != 0."""

        def case(rng: np.random.Generator) -> float:
            u = self._draw(rng, reg)
            a = float(rng.uniform(0.1, 10.0)) * (1.0 if rng.random() < 0.5 else -1.0)
            return _relative(reg.ratio(a * u), reg.ratio(u))

        return self._run(f"scale_invariance[{reg.name}]", IDENTITY_TOL, 4, case)

    @staticmethod
    def _adjoint_gap(op: AbstractOperator, u: np.ndarray, r: np.ndarray) -> float:
        lhs = op.inner(op.apply(u), r)
        rhs = op.inner(u, op.apply_adjoint(r))
        return abs(lhs - rhs) / max(float(np.linalg.norm(u)) * float(np.linalg.norm(r)), 1e-300)

    def dense_adjoint(self) -> PropertyOutcome:
        def case(rng: np.random.Generator) -> float:
            m, n = int(rng.integers(2, 30)), int(rng.integers(1, 60))
            op = DenseOperator(rng.standard_normal((m, n)))
            return self._adjoint_gap(op, rng.standard_normal(n), rng.standard_normal(m))

        return self._run("adjoint[dense]", ADJOINT_TOL, 5, case)

    @staticmethod
    def _random_mask(rng: np.random.Generator, height: int, width: int) -> np.ndarray:
        mask = symmetrize_mask(rng.random((height, width)) < 0.4)
        mask[0, 0] = True
        return mask

    def fourier_adjoint(self) -> PropertyOutcome:
        def case(rng: np.random.Generator) -> float:
            height, width = int(rng.integers(2, 17)), int(rng.integers(2, 17))
            op = RadialFourierOperator(self._random_mask(rng, height, width))
            r = rng.standard_normal(op.output_shape) + 1j * rng.standard_normal(op.output_shape)
            return self._adjoint_gap(op, rng.standard_normal((height, width)), r)

        return self._run("adjoint[fourier]", ADJOINT_TOL, 6, case)

    def gradient_adjoint(self) -> PropertyOutcome:
        def case(rng: np.random.Generator) -> float:
            height, width = int(rng.integers(2, 17)), int(rng.integers(2, 17))
            u = rng.standard_normal((height, width))
            g = rng.standard_normal((2, height, width))
            lhs = float(np.vdot(grad(u), g))
            rhs = float(np.vdot(u, grad_adjoint(g)))
            return abs(lhs - rhs) / max(float(np.linalg.norm(u)) * float(np.linalg.norm(g)), 1e-300)

        return self._run("adjoint[gradient]", ADJOINT_TOL, 7, case)

    def shrink_prox(self) -> PropertyOutcome:
        """z = shrink(x, t) satisfies x - z in t * sign(z) (exactly t*sign(z_i) off zero, |x_i| <= t on zero)."""

        def case(rng: np.random.Generator) -> float:
            x = 3.0 * rng.standard_normal(int(rng.integers(1, 50)))
            t = float(rng.uniform(0.0, 3.0))
            z = shrink(x, t)
            active = z != 0.0
            off_zero = np.abs(x - z - t * np.sign(z))[active]
            on_zero = np.maximum(np.abs(x) - t, 0.0)[~active]
            # magnitude never grows and sign never flips
            flipped = np.any(z * x < 0.0) or np.any(np.abs(z) > np.abs(x))
            worst = max(float(off_zero.max(initial=0.0)), float(on_zero.max(initial=0.0)))
            return math.inf if flipped else worst / max(float(np.abs(x).max()), 1.0)

        return self._run("shrink_prox", IDENTITY_TOL, 8, case)

    def woodbury_vs_dense(self) -> PropertyOutcome:
        """(lam A^T A + I/kappa)^-1 b by Woodbury against a dense solve."""

        def case(rng: np.random.Generator) -> float:
            m = int(rng.integers(2, 16))
            n = int(rng.integers(m + 1, 40))
            matrix = rng.standard_normal((m, n)) / math.sqrt(m)
            op = DenseOperator(matrix)
            lam = float(10.0 ** rng.uniform(-2.0, 2.0))
            kappa = 1.0 / (float(rng.uniform(0.1, 10.0)) + float(rng.uniform(0.1, 10.0)))
            b = rng.standard_normal(n)
            fast = woodbury_solve(op, kappa, lam, b)
            reference = np.linalg.solve(lam * matrix.T @ matrix + np.eye(n) / kappa, b)
            return float(np.linalg.norm(fast - reference)) / max(float(np.linalg.norm(reference)), 1e-300)

        return self._run("woodbury_vs_dense", WOODBURY_TOL, 9, case)

    def spectral_vs_dense(self) -> PropertyOutcome:
        """FFT-diagonal solve of (lam A^T A + rho D^T D + beta I) against the materialized 64 x 64 matrix."""
        side = SPECTRAL_SIDE
        basis = np.eye(side * side).reshape(side * side, side, side)

        def case(rng: np.random.Generator) -> float:
            op = RadialFourierOperator(self._random_mask(rng, side, side))
            rho, beta, lam = (float(10.0 ** rng.uniform(-1.0, 1.0)) for _ in range(3))
            columns = [
                lam * op.apply_adjoint(op.apply(e)) + rho * grad_adjoint(grad(e)) + beta * e for e in basis
            ]
            system = np.stack([c.ravel() for c in columns], axis=1)
            b = rng.standard_normal((side, side))
            fast = op.spectral_solve(op.spectral_denominator(rho, beta, lam), b)
            reference = np.linalg.solve(system, b.ravel()).reshape(side, side)
            return float(np.linalg.norm(fast - reference)) / max(float(np.linalg.norm(reference)), 1e-300)

        return self._run("spectral_vs_dense", SPECTRAL_TOL, 10, case)

    def full_k_ratio(self) -> PropertyOutcome:
        """||u||_(n) = ||u||_1, so L1/S_K with K = n is identically 1 away from 0."""

        def case(rng: np.random.Generator) -> float:
            u = self._draw(rng, self.regularizers[0])
            return abs(L1OverSK(u.size).ratio(u) - 1.0)

        return self._run("full_k_ratio", IDENTITY_TOL, 11, case)

    def run(self) -> list[PropertyOutcome]:
        start = time.time()
        outcomes: list[PropertyOutcome] = []
        for reg in self.regularizers:
            outcomes += [self.subgradient_identity(reg), self.subgradient_inequality(reg), self.homogeneity(reg), self.scale_invariance(reg)]
        outcomes += [
            self.dense_adjoint(),
            self.fourier_adjoint(),
            self.gradient_adjoint(),
            self.shrink_prox(),
            self.woodbury_vs_dense(),
            self.spectral_vs_dense(),
            self.full_k_ratio(),
        ]
        failed = [o.name for o in outcomes if not o.passed]
        logger.info(
            f"[properties] {len(outcomes) - len(failed)}/{len(outcomes)} properties passed "
            f"({self.cases} cases each) in {ExperimentHelper.format_duration(time.time() - start)}"
        )
        if failed:
            logger.warning(f"[properties] failing: {', '.join(failed)}")
        return outcomes
