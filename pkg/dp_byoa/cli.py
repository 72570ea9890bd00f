"""Command-line entry point for dp-byoa."""

import argparse
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from .config import DpByoaSettings, RunConfig, load_config
from .exceptions import (
    ArgumentError,
    BudgetExceededError,
    ConfigError,
    NotSupportedError,
    OracleError,
    PhaseFailedError,
)
from .routers.experiment_router import ExperimentRouter, Subcommand
from .utils.artifacts import ArtifactWriter
from .verify import format_table, run_acceptance_suite


logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG_ERROR = 2
EXIT_SOLVER_FAILURE = 3
EXIT_ACCEPTANCE_FAILURE = 4

SOLVER_FAILURES = (PhaseFailedError, BudgetExceededError, OracleError, NotSupportedError)


def build_parser() -> argparse.ArgumentParser:
    """Parser with the run, sweep, probe and verify subcommands."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="Root seed (overrides the config)")
    common.add_argument("--jobs", type=int, default=None, help="Worker processes for sweeps")
    common.add_argument("--out", default=None, help="Output directory for artifacts")
    common.add_argument(
        "--quick", action="store_true", help="Halve trial and repetition counts"
    )
    common.add_argument(
        "--no-noise",
        action="store_true",
        help="TESTING ONLY: disable all noise; outputs are NOT differentially private",
    )

    parser = argparse.ArgumentParser(
        prog="dp-byoa",
        description="Differentially private optimization by output perturbation",
    )
    commands = parser.add_subparsers(dest="command", required=True)
    for subcommand, text in (
        (Subcommand.RUN, "Run a DP algorithm config"),
        (Subcommand.SWEEP, "Run a utility sweep config"),
        (Subcommand.PROBE, "Run a stability probe config"),
    ):
        command = commands.add_parser(subcommand.value, parents=[common], help=text)
        command.add_argument("config", help="Path to a key = value experiment file")
    commands.add_parser("verify", parents=[common], help="Run the acceptance suite")
    return parser


def _output_dir(args: argparse.Namespace, config: RunConfig, settings: DpByoaSettings) -> Path:
    if args.out:
        return Path(args.out)
    if "output_dir" in config.model_fields_set:
        return Path(config.output_dir)
    return Path(settings.output_dir)


def _handle_experiment(
    subcommand: Subcommand, args: argparse.Namespace, settings: DpByoaSettings
) -> int:
    config = load_config(args.config)
    router = ExperimentRouter(
        jobs=args.jobs or settings.jobs,
        quick=args.quick or settings.quick,
        seed=args.seed,
        no_noise=args.no_noise,
    )
    logger.info(router.explain(config).rstrip())
    result = router.route(subcommand, config)

    writer = ArtifactWriter(_output_dir(args, config, settings))
    for path in writer.write_result(result):
        print(path)

    if result.records and all(record.error is not None for record in result.records):
        logger.error("Every sweep run failed")
        return EXIT_SOLVER_FAILURE
    if not result.ok:
        for probe in result.failed_probes:
            logger.error(
                f"Probe {probe.target}/{probe.check} n={probe.n}: "
                f"{probe.violations}/{probe.trials} violations"
            )
        return EXIT_ACCEPTANCE_FAILURE
    return EXIT_OK


def _handle_verify(args: argparse.Namespace, settings: DpByoaSettings) -> int:
    seed = 0 if args.seed is None else args.seed
    rows = run_acceptance_suite(quick=args.quick or settings.quick, seed=seed)
    print(format_table(rows), end="")
    return EXIT_OK if all(row.passed for row in rows) else EXIT_ACCEPTANCE_FAILURE


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main entry point."""
    settings = DpByoaSettings()
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=settings.log_level.upper(),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )

    if args.no_noise:
        logger.warning("=" * 72)
        logger.warning("NO-NOISE MODE: outputs are NOT differentially private. Testing only.")
        logger.warning("=" * 72)

    try:
        if args.command == "verify":
            return _handle_verify(args, settings)
        return _handle_experiment(Subcommand(args.command), args, settings)
    except (ConfigError, ArgumentError) as e:
        logger.error(f"Config error: {e}")
        return EXIT_CONFIG_ERROR
    except SOLVER_FAILURES as e:
        logger.error(f"Solver failure: {e}", exc_info=True)
        return EXIT_SOLVER_FAILURE
    except KeyboardInterrupt:
        logger.info("Stopped by user")
        return EXIT_SOLVER_FAILURE


if __name__ == "__main__":
    sys.exit(main())
