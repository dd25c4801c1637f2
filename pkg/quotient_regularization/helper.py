import hashlib
import logging
from typing import Any

from quotient_regularization.config import Config
from quotient_regularization.custom_types import SolverConfig
from quotient_regularization.errors import ArgumentError

logger = logging.getLogger(__name__)


class ExperimentHelper:
    @staticmethod
    def config_hash() -> str:
        """First 12 hex digits of the sha256 of the config file bytes."""
        try:
            with open(Config.config_path(), "rb") as f:
                return hashlib.sha256(f.read()).hexdigest()[:12]
        except OSError as e:
            logger.warning(f"[config_hash] could not read config file: {e}")
            return "unknown"

    @staticmethod
    def trial_seed(seed: int, trial: int) -> int:
        return seed + trial

    @staticmethod
    def format_duration(seconds: float) -> str:
        """Render seconds as '2 hours, 11 minutes, 30 seconds'. Drops zero-valued
        units and pluralizes correctly. Sub-second runs render with one decimal."""
        if seconds < 1.0:
            return f"{max(seconds, 0.0):.1f} seconds"
        s = int(seconds)
        parts = []
        for name, size in (("day", 86400), ("hour", 3600), ("minute", 60), ("second", 1)):
            n, s = divmod(s, size)
            if n:
                parts.append(f"{n} {name}{'s' if n != 1 else ''}")
        return ", ".join(parts)

    @staticmethod
    def resolve_lambda(settings: dict[str, Any], f_norm: float) -> float:
        """A numeric lambda as is; "auto" becomes lambda_scale / ||f||^2."""
        lam = settings["lambda"]
        if lam != "auto":
            return float(lam)
        if f_norm == 0.0:
            raise ArgumentError("lambda 'auto' is undefined for f = 0")
        return float(settings["lambda_scale"]) / f_norm**2

    @staticmethod
    def solver_config(settings: dict[str, Any], f_norm: float, section: str, **overrides: Any) -> SolverConfig:
        """SolverConfig for one instance. Invalid values are configuration errors."""
        fields = {
            "beta": settings["beta"],
            "rho": settings["rho"],
            "lam": ExperimentHelper.resolve_lambda(settings, f_norm),
            "K": settings.get("K"),
            "eps": settings["eps"],
            "inner_eps": settings.get("inner_eps"),
            "k_max": settings["k_max"],
            "j_max": settings["j_max"],
            "seed": settings.get("seed", 0),
            "mu": settings.get("mu", 1.0),
            "l1_j_max": settings.get("l1_j_max", 2000),
        }
        fields.update(overrides)
        try:
            return SolverConfig(**fields)
        except ArgumentError as e:
            Config.fail_at(f"invalid solver settings: {e}", section, "solver")
