import os
import sys
import logging
import argparse
import time
from pathlib import Path
from datetime import datetime

from numerics.errors import ConfigError, PolyfixError, SingularNormalizationError
from runner.commands import cmd_landau, cmd_suite, COMMAND_TABLE
from runner.config import ExperimentConfig
from runner.report import EXIT_ALARM, EXIT_CONFIG, EXIT_PRECONDITION, to_json, write_csv, write_json

logger = logging.getLogger(__name__)


def configure_logging(logs_dir="logs", quiet=False):
    """Log to logs/polyfix_<timestamp>.log and to the console."""
    Path(logs_dir).mkdir(parents=True, exist_ok=True)
    logging.basicConfig(
        level=logging.WARNING if quiet else logging.INFO,
        format="%(asctime)s - %(levelname)s - %(message)s",
        handlers=[
            logging.FileHandler(
                f'{logs_dir}/polyfix_{datetime.now().strftime("%Y%m%d_%H%M%S")}.log'
            ),
            logging.StreamHandler(),
        ],
        force=True,
    )


def format_time(seconds):
    """Format seconds into a human-readable time string."""
    minutes, seconds = divmod(seconds, 60)
    hours, minutes = divmod(minutes, 60)

    if hours > 0:
        return f"{int(hours)}h {int(minutes)}m {seconds:.2f}s"
    elif minutes > 0:
        return f"{int(minutes)}m {seconds:.2f}s"
    else:
        return f"{seconds:.2f}s"


class UsageParser(argparse.ArgumentParser):
    """Usage errors exit with 1, the code shared with config errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser():
    parser = UsageParser(
        prog="polyfix",
        description="Fixed points and periodic orbits of nonexpansive maps under polyhedral norms",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    for name in ("certify", "fix", "orbit", "structure"):
        sub = commands.add_parser(name)
        sub.add_argument("--config", required=True, help="Path to YAML experiment config")
        add_common_arguments(sub)
        if name == "structure":
            sub.add_argument(
                "--oracle", action="store_true", help="Cross-check locked faces by brute force (n <= 3)"
            )
        if name == "orbit":
            sub.add_argument(
                "--linearize", action="store_true", help="Reduce f on Fix(f^q) to a linear isometry"
            )

    suite = commands.add_parser("suite")
    suite.add_argument("directory", help="Directory of experiment configs")
    add_common_arguments(suite)

    table = commands.add_parser("landau")
    table.add_argument("--n-max", type=int, default=12, help="Largest n in the table")
    table.add_argument("--out", help="Write the JSON report here")
    table.add_argument("--quiet", action="store_true", help="Only log warnings and errors")
    return parser


def add_common_arguments(parser):
    parser.add_argument("--out", help="Write the JSON report here")
    parser.add_argument("--seed", type=int, help="Override the config seed")
    parser.add_argument("--starts", type=int, help="Override the number of random starts")
    parser.add_argument("--quiet", action="store_true", help="Only log warnings and errors")


def load_config(args):
    """Config file, then POLYFIX_* environment overrides, then command-line flags."""
    config = ExperimentConfig.from_yaml(args.config).apply_environment()
    if args.seed is not None:
        config.seed = args.seed
    if args.starts is not None:
        config.starts = args.starts
    if getattr(args, "oracle", False):
        config.oracle = True
    if getattr(args, "linearize", False):
        config.linearize = True
    config.validate()
    return config


def main(argv=None):
    """Run one polyfix subcommand and return its exit code."""
    args = build_parser().parse_args(argv)
    try:
        environment = ExperimentConfig.from_environment()
    except ConfigError as e:
        configure_logging(os.getenv("POLYFIX_LOGS_DIR", "logs"), args.quiet)
        logger.error(f"Configuration error: {e}")
        return EXIT_CONFIG
    configure_logging(environment.logs_dir, args.quiet)

    total_start_time = time.time()
    try:
        if args.command == "landau":
            report = cmd_landau(args.n_max)
        elif args.command == "suite":
            report = cmd_suite(args.directory, args.seed, args.starts, environment.threads)
        else:
            config = load_config(args)
            logger.info(f"Running {args.command} on {config.name} ({config.map.get('kind')} map)")
            report = COMMAND_TABLE[args.command](config)
    except (ConfigError, FileNotFoundError) as e:
        logger.error(f"Configuration error: {e}")
        return EXIT_CONFIG
    except SingularNormalizationError as e:
        logger.error(f"{args.command} cannot start: {e}")
        return EXIT_PRECONDITION
    except PolyfixError as e:
        logger.error(f"{args.command} failed after {format_time(time.time() - total_start_time)}: {e}")
        return EXIT_ALARM
    except Exception as e:
        logger.error(f"{args.command} failed after {format_time(time.time() - total_start_time)}: {str(e)}")
        return EXIT_CONFIG

    if args.out:
        write_json(report, args.out)
        if report.rows:
            write_csv(report.rows, Path(args.out).with_suffix(".csv"))
    else:
        print(to_json(report))

    for alarm in report.alarms:
        logger.warning(alarm)
    logger.info(f"{args.command} completed in {format_time(time.time() - total_start_time)}")
    logger.info(f"Exit code {report.exit_code} ({report.status})")
    return report.exit_code


def run():
    sys.exit(main())


if __name__ == "__main__":
    run()
