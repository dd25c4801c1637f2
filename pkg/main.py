import argparse
import logging
import os
import sys
from collections.abc import Callable
from logging.handlers import RotatingFileHandler

from quotient_regularization.bench_mri import cmd_bench_mri, cmd_recover_image
from quotient_regularization.bench_signal import cmd_bench_table1, cmd_bench_table2, cmd_recover_signal
from quotient_regularization.config import Config
from quotient_regularization.custom_types import RunOptions
from quotient_regularization.errors import ArgumentError, QRMError
from quotient_regularization.verify_theory import cmd_verify_theory

# Logger will be used for all modules under quotient_regularization
app_logger = logging.getLogger("quotient_regularization")
project_root_dir = os.path.dirname(os.path.abspath(__file__))
log_path = os.path.join(project_root_dir, "tmp", "_logs", "app.log")

LOG_MAX_BYTES = 5 * 1024 * 1024  # 5 MB per file
LOG_BACKUP_COUNT = 50

COMMANDS: dict[str, Callable[[RunOptions], int]] = {
    "recover-signal": cmd_recover_signal,
    "recover-image": cmd_recover_image,
    "bench-table1": cmd_bench_table1,
    "bench-table2": cmd_bench_table2,
    "bench-mri": cmd_bench_mri,
    "verify-theory": cmd_verify_theory,
}


def setup_logging():
    """
    Attaches the package handlers once: per-iteration solver traces (DEBUG) go to the
    rotating log file, run summaries and warnings (INFO) to the console.
    """
    app_logger.setLevel(logging.DEBUG)
    app_logger.propagate = False

    # repeated calls (tests, nested commands) must not stack handlers
    if not app_logger.handlers:
        os.makedirs(os.path.dirname(log_path), exist_ok=True)
        file_handler = RotatingFileHandler(log_path, maxBytes=LOG_MAX_BYTES, backupCount=LOG_BACKUP_COUNT)
        file_handler.setLevel(logging.DEBUG)
        file_formatter = logging.Formatter("%(asctime)s %(levelname)-8s %(threadName)s %(message)s", datefmt="%Y-%m-%d %H:%M:%S")
        file_handler.setFormatter(file_formatter)
        app_logger.addHandler(file_handler)

        # Console Handler
        console_handler = logging.StreamHandler()
        console_handler.setLevel(logging.INFO)
        console_formatter = logging.Formatter("%(levelname)-8s %(message)s")
        console_handler.setFormatter(console_formatter)
        app_logger.addHandler(console_handler)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="main.py",
        description="Quotient regularization solvers and the experiments built on them.",
    )
    parser.add_argument("command", choices=list(COMMANDS), help="experiment to run")
    parser.add_argument("--config", default="default.yaml", help="config file under config/, or a path (default: default.yaml)")
    parser.add_argument("--seed", type=int, default=None, help="base seed, overrides solver.seed")
    parser.add_argument("--trials", type=int, default=None, help="trials per cell for the randomized benchmarks")
    parser.add_argument("--jobs", type=int, default=None, help="worker threads (default: number of CPUs)")
    parser.add_argument("--out-dir", default="out", help="output directory (default: out)")
    return parser


def handle_args(argv: list[str] | None = None) -> tuple[str, RunOptions]:
    args = build_parser().parse_args(argv)
    try:
        options = RunOptions(seed=args.seed, trials=args.trials, jobs=args.jobs, out_dir=args.out_dir)
    except ArgumentError as e:
        build_parser().error(str(e))

    Config.config_filename = args.config
    Config.get_config()  # Used to verify that we are able to load the config before doing anything else
    return args.command, options


def main(command: str, options: RunOptions) -> int:
    app_logger.info(f"[{command}] config '{Config.config_filename}', out dir '{options.out_dir}'")
    try:
        return COMMANDS[command](options)
    except QRMError as e:
        app_logger.error(f"[{command}] failed: {e}", exc_info=True)
        return 1


if __name__ == "__main__":
    setup_logging()
    command, options = handle_args()
    app_logger.info("========== RUN START ==========")
    app_logger.info(f"Logging to rotating log file: '{log_path}'")
    exit_code = main(command, options)
    app_logger.info("========== RUN STOP ==========")
    print(f"log file can be found under: '{log_path}'", flush=True)
    sys.exit(exit_code)
