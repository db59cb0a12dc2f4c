"""
Experiment runner: configs, subcommands and reports.
"""

from .commands import cmd_certify, cmd_fix, cmd_landau, cmd_orbit, cmd_structure, cmd_suite, run_config
from .config import Caps, ExperimentConfig, Tolerances
from .report import RunReport

__all__ = [
    "Caps",
    "ExperimentConfig",
    "RunReport",
    "Tolerances",
    "cmd_certify",
    "cmd_fix",
    "cmd_landau",
    "cmd_orbit",
    "cmd_structure",
    "cmd_suite",
    "run_config",
]
