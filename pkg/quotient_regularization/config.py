import logging
import os
import sys
from typing import Any, NoReturn

import yaml

logger = logging.getLogger(__name__)

# config problems exit with this status, distinct from solver failures (1)
CONFIG_EXIT_CODE = 2


class Config:
    config_filename = "default.yaml"

    REQUIRED_SOLVER_KEYS = ("beta", "rho", "lambda", "eps", "k_max", "j_max")
    OPTIONAL_SOLVER_KEYS = {
        "inner_eps": None,
        "mu": 1.0,
        "l1_j_max": 2000,
        "lambda_scale": 1000.0,
        "seed": 0,
        "K": None,
    }
    INTEGER_SOLVER_KEYS = ("k_max", "j_max", "l1_j_max", "seed", "K")

    @staticmethod
    def config_path() -> str:
        """config_filename itself when it names an existing file, otherwise config/<config_filename>."""
        if os.path.isfile(Config.config_filename):
            return os.path.abspath(Config.config_filename)
        project_root_dir = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
        return os.path.join(project_root_dir, "config", Config.config_filename)

    @staticmethod
    def get_config() -> dict[str, Any] | None:
        config_path = Config.config_path()
        try:
            with open(config_path, encoding="utf-8") as f:
                config_data = yaml.safe_load(f)
        except FileNotFoundError:
            Config._fail(f"Configuration file '{Config.config_filename}' not found.")
        except yaml.YAMLError as e:
            mark = getattr(e, "problem_mark", None)
            where = f"{Config.config_filename}:{mark.line + 1}" if mark is not None else Config.config_filename
            Config._fail(f"{where}: error parsing YAML: {e}")
        except Exception as e:
            Config._fail(f"An error occurred while loading the config: {e}")

        if config_data is None:
            return {}
        if not isinstance(config_data, dict):
            Config._fail(f"{Config.config_filename}:1: top level must be a mapping of sections")
        return config_data

    @staticmethod
    def _fail(message: str) -> NoReturn:
        logger.critical(message)
        sys.exit(CONFIG_EXIT_CODE)

    @staticmethod
    def line_of(*keys: str) -> int | None:
        """1-based line of the value at the given key path, or None when it cannot be located."""
        try:
            with open(Config.config_path(), encoding="utf-8") as f:
                node = yaml.compose(f)
        except (OSError, yaml.YAMLError):
            return None
        for key in keys:
            if not isinstance(node, yaml.MappingNode):
                return None
            match = next((v for k, v in node.value if getattr(k, "value", None) == key), None)
            if match is None:
                return None
            node = match
        return node.start_mark.line + 1

    @staticmethod
    def fail_at(message: str, *keys: str) -> NoReturn:
        """Exits with a message anchored to the file line of the key path (or of its closest existing parent)."""
        path = list(keys)
        line = None
        while path and line is None:
            line = Config.line_of(*path)
            path.pop()
        where = f"{Config.config_filename}:{line}" if line is not None else Config.config_filename
        Config._fail(f"{where}: {message}")

    @staticmethod
    def get_section(name: str) -> dict[str, Any]:
        config_data = Config.get_config()
        if not config_data:
            logger.error("Error: Cannot search in empty or invalid configuration.")
            return {}

        section = config_data.get(name, {}) or {}
        if not isinstance(section, dict):
            Config.fail_at(f"section '{name}' must be a mapping", name)
        return section

    @staticmethod
    def get_value(section: str, key: str, default: Any = None, kind: type | tuple[type, ...] | None = None) -> Any:
        """A command setting. Missing keys without a default are fatal, as are values of the wrong type."""
        values = Config.get_section(section)
        if key not in values:
            if default is None:
                Config.fail_at(f"missing required key '{key}' in section '{section}'", section)
            return default
        value = values[key]
        if kind is not None and (isinstance(value, bool) or not isinstance(value, kind)):
            Config.fail_at(f"key '{key}' in section '{section}' has invalid value {value!r}", section, key)
        return value

    @staticmethod
    def get_solver_settings(section: str, method: str | None = None) -> dict[str, Any]:
        """
        Global `solver` keys, overridden by the section's `solver` mapping, then by
        `method_solver.<method>` when a method is given.
        lambda may be a positive number or "auto" (lambda_scale / ||f||^2 per instance).
        """
        config_data = Config.get_config() or {}
        merged: dict[str, Any] = {}
        origin: dict[str, tuple[str, ...]] = {}

        base = config_data.get("solver", {}) or {}
        if not isinstance(base, dict):
            Config.fail_at("section 'solver' must be a mapping", "solver")
        for key, value in base.items():
            merged[key] = value
            origin[key] = ("solver", key)

        override = Config.get_section(section).get("solver", {}) or {}
        if not isinstance(override, dict):
            Config.fail_at(f"'{section}.solver' must be a mapping", section, "solver")
        for key, value in override.items():
            merged[key] = value
            origin[key] = (section, "solver", key)

        if method is not None:
            per_method = Config.get_section(section).get("method_solver", {}) or {}
            if not isinstance(per_method, dict):
                Config.fail_at(f"'{section}.method_solver' must be a mapping", section, "method_solver")
            method_override = per_method.get(method, {}) or {}
            if not isinstance(method_override, dict):
                Config.fail_at(f"'{section}.method_solver.{method}' must be a mapping", section, "method_solver", method)
            for key, value in method_override.items():
                merged[key] = value
                origin[key] = (section, "method_solver", method, key)

        for key in Config.REQUIRED_SOLVER_KEYS:
            if key not in merged:
                Config.fail_at(f"missing required key '{key}' in section 'solver'", "solver")

        known = set(Config.REQUIRED_SOLVER_KEYS) | set(Config.OPTIONAL_SOLVER_KEYS)
        for key in merged:
            if key not in known:
                Config.fail_at(f"unknown solver key '{key}'", *origin[key])

        for key, default in Config.OPTIONAL_SOLVER_KEYS.items():
            merged.setdefault(key, default)

        for key, value in merged.items():
            if value is None:
                continue
            if key == "lambda" and value == "auto":
                continue
            if isinstance(value, bool) or not isinstance(value, int | float):
                Config.fail_at(f"solver key '{key}' must be a number, got {value!r}", *origin.get(key, ("solver",)))
            if key in Config.INTEGER_SOLVER_KEYS and not isinstance(value, int):
                Config.fail_at(f"solver key '{key}' must be an integer, got {value!r}", *origin.get(key, ("solver",)))
        return merged
