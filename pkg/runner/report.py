"""
Run reports: schema-versioned JSON documents and the CSV suite summary.
"""

import csv
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List

import numpy as np

from runner.config import SCHEMA_VERSION

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_CERTIFICATE_FAIL = 2
EXIT_ALARM = 3
EXIT_PRECONDITION = 4

# worst first; used to merge the exit codes of several runs
SEVERITY = (EXIT_ALARM, EXIT_CERTIFICATE_FAIL, EXIT_CONFIG, EXIT_PRECONDITION, EXIT_OK)

SUITE_COLUMNS = [
    "config",
    "map",
    "norm",
    "n",
    "certificate",
    "q",
    "permutation_order_form",
    "below_2n",
    "A2_defect",
    "isometry_defect",
    "exit_code",
    "status",
]


def worst_exit_code(codes) -> int:
    codes = set(codes)
    for code in SEVERITY:
        if code in codes:
            return code
    return EXIT_OK


@dataclass
class RunReport:
    command: str
    config: Dict[str, Any] = field(default_factory=dict)
    results: Dict[str, Any] = field(default_factory=dict)
    alarms: List[str] = field(default_factory=list)
    exit_code: int = EXIT_OK
    timing: Dict[str, float] = field(default_factory=dict)
    rows: List[Dict[str, Any]] = field(default_factory=list)

    @property
    def status(self) -> str:
        return {
            EXIT_OK: "ok",
            EXIT_CONFIG: "config-error",
            EXIT_CERTIFICATE_FAIL: "certificate-fail",
            EXIT_ALARM: "alarm",
            EXIT_PRECONDITION: "precondition-unmet",
        }[self.exit_code]

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "command": self.command,
            "config": self.config,
            "results": self.results,
            "alarms": list(self.alarms),
            "exit_code": self.exit_code,
            "status": self.status,
            "timing": dict(self.timing),
        }


def _plain(value):
    """Convert numpy values (and non-finite floats) into JSON-ready data."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, set, frozenset)):
        items = sorted(value) if isinstance(value, (set, frozenset)) else value
        return [_plain(v) for v in items]
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, np.generic):
        return _plain(value.item())
    if isinstance(value, float) and not math.isfinite(value):
        return "inf" if value > 0 else ("-inf" if value < 0 else "nan")
    return value


def to_json(report: RunReport) -> str:
    return json.dumps(_plain(report.to_dict()), sort_keys=True, indent=2)


def write_json(report: RunReport, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(to_json(report) + "\n", encoding="utf-8")
    logger.info(f"Report written to {path}")
    return path


def write_csv(rows: List[Dict[str, Any]], path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.DictWriter(f, fieldnames=SUITE_COLUMNS, extrasaction="ignore")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _plain(row.get(k)) for k in SUITE_COLUMNS})
    logger.info(f"Suite summary written to {path}")
    return path
