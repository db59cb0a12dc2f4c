"""
The polyfix subcommands: each binds a config to the library and returns a RunReport.
"""

import concurrent.futures
import logging
import math
import time
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np

from dynamics.bounds import audit_period
from dynamics.iteration import distinct_points, harvest_fixed_points, krasnoselskii
from dynamics.orbits import Orbit, default_p_max, find_orbits, lcm_of_observed_periods
from maps.base import MapSpec
from maps.certify import LipschitzCertificate, certify_nonexpansive
from numerics.combinatorics import landau, partitions_lcm_set
from numerics.errors import ConfigError, PolyfixError, SingularNormalizationError
from polynorm.norms import PolyhedralNorm
from runner.config import ExperimentConfig
from runner.report import (
    EXIT_ALARM,
    EXIT_CERTIFICATE_FAIL,
    EXIT_CONFIG,
    EXIT_OK,
    EXIT_PRECONDITION,
    RunReport,
    worst_exit_code,
)
from structure.analysis import POINT_SEPARATION, analyze_structure, reduce_to_linear
from structure.derivative import retract_idempotence_defect

logger = logging.getLogger(__name__)

CONFIG_SUFFIXES = (".yaml", ".yml", ".json")
# residual histories may wobble by rounding once they reach this level
MONOTONE_SLACK = 1e-14
IDEMPOTENCE_RUNS = 10


def _prepare(config: ExperimentConfig) -> Tuple[PolyhedralNorm, MapSpec]:
    config.validate()
    norm = config.build_norm()
    return norm, config.build_map(norm)


def _certify(config, norm, f) -> LipschitzCertificate:
    return certify_nonexpansive(
        f,
        norm,
        trials=config.trials,
        seed=config.seed,
        tol=config.tolerances.check_tol,
        radius=config.box,
        workers=config.threads,
    )


def _finish(report: RunReport, start: float) -> RunReport:
    report.timing["wall_clock_seconds"] = time.time() - start
    logger.info(f"{report.command} finished with exit code {report.exit_code} ({report.status})")
    return report


def _structure_settings(config: ExperimentConfig) -> dict:
    tol = config.tolerances
    return dict(
        face_tol=tol.face_tol,
        fp_tol=tol.fp_tol,
        check_tol=tol.check_tol,
        max_iter=config.caps.max_iter,
        retry_budget=config.caps.retry_budget,
        samples=config.samples,
        seed=config.seed,
        starts=config.starts,
    )


def cmd_certify(config: ExperimentConfig) -> RunReport:
    """Nonexpansiveness certificate; exit 2 on FAIL."""
    report, start, _ = _certified("certify", config)
    return _finish(report, start)


def _certified(command, config) -> Tuple[RunReport, float, Optional[Tuple[PolyhedralNorm, MapSpec]]]:
    start = time.time()
    report = RunReport(command, config.to_dict())
    norm, f = _prepare(config)
    cert = _certify(config, norm, f)
    report.results["certificate"] = cert.to_dict()
    if not cert.passed:
        report.alarms.append(f"certificate FAIL: bound {cert.bound:.12g} > 1")
        report.exit_code = EXIT_CERTIFICATE_FAIL
        return report, start, None
    return report, start, (norm, f)


def _harvest(config, norm, f):
    results = harvest_fixed_points(
        f,
        norm,
        config.starts,
        config.seed,
        config.box,
        config.tolerances.fp_tol,
        config.caps.max_iter,
        config.threads,
    )
    converged = [r.point for r in results if r.converged]
    return results, distinct_points(converged, norm, POINT_SEPARATION)


def cmd_fix(config: ExperimentConfig) -> RunReport:
    """Harvest fixed points from random starts; exit 4 when none converge."""
    report, start, prepared = _certified("fix", config)
    if prepared is None:
        return _finish(report, start)
    norm, f = prepared

    results, points = _harvest(config, norm, f)
    monotone = all(
        all(b <= a + MONOTONE_SLACK for a, b in zip(r.residual_history, r.residual_history[1:]))
        for r in results
    )
    idempotence = max(
        (
            retract_idempotence_defect(f, r.point, norm, config.tolerances.fp_tol, config.caps.max_iter)
            for r in results[:IDEMPOTENCE_RUNS]
            if r.converged
        ),
        default=0.0,
    )
    report.results.update(
        {
            "runs": [r.to_dict() for r in results],
            "fixed_points": [p.tolist() for p in points],
            "residuals_monotone": monotone,
            "idempotence_defect": idempotence,
        }
    )
    if not points:
        report.alarms.append("no start converged: Fix(f) may be empty")
        report.exit_code = EXIT_PRECONDITION
    elif not monotone or idempotence > 2 * config.tolerances.fp_tol:
        report.alarms.append("Krasnoselskii contract violated")
        report.exit_code = EXIT_ALARM
    return _finish(report, start)


def _fixed_point_of(f, norm, config, orbits: List[Orbit]) -> Optional[np.ndarray]:
    for orbit in orbits:
        if orbit.minimal_period == 1:
            return orbit.representative
    result = krasnoselskii(f, np.zeros(f.dim), config.tolerances.fp_tol, config.caps.max_iter, norm)
    return result.point if result.converged else None


def cmd_orbit(config: ExperimentConfig) -> RunReport:
    """Periodic orbits from random starts, q = lcm of periods, and the period audit; exit 3 on alarm."""
    report, start, prepared = _certified("orbit", config)
    if prepared is None:
        return _finish(report, start)
    norm, f = prepared
    tol = config.tolerances
    p_max = default_p_max(f.dim, norm.p_norm, config.caps.p_max)
    logger.info(f"Scanning candidate periods up to {p_max}")

    found = find_orbits(
        f,
        norm,
        config.starts,
        config.seed,
        config.box,
        tol.orbit_tol,
        config.caps.max_iter,
        p_max,
        tol.fp_tol,
        config.threads,
    )
    orbits = [o for o in found if isinstance(o, Orbit)]
    report.results["p_max"] = p_max
    report.results["orbits"] = [o.to_dict() for o in orbits]
    report.results["failures"] = [f"{type(e).__name__}: {e}" for e in found if not isinstance(e, Orbit)]
    if not orbits:
        report.alarms.append("no periodic orbit detected from any start")
        report.exit_code = EXIT_PRECONDITION
        return _finish(report, start)

    periods = sorted({o.minimal_period for o in orbits})
    q = lcm_of_observed_periods(orbits)
    audit = audit_period(q, f.dim, norm.p_norm, periods)
    report.results.update({"periods": periods, "q": q, "audit": audit.to_dict()})
    logger.info(f"Observed periods {periods}, q = {q}")
    if audit.alarm:
        failed = [k for k, v in audit.guaranteed.items() if not v]
        report.alarms.append(f"period audit failed: {failed}")
        report.exit_code = EXIT_ALARM

    if config.linearize:
        _linearize(report, config, norm, f, orbits, q)
    return _finish(report, start)


def _linearize(report, config, norm, f, orbits, q) -> None:
    base = _fixed_point_of(f, norm, config, orbits)
    if base is None:
        report.results["linearization"] = None
        report.alarms.append("no fixed point of f to linearize around")
        report.exit_code = worst_exit_code([report.exit_code, EXIT_PRECONDITION])
        return
    points = [p for o in orbits for p in o.points]
    structure = reduce_to_linear(f, norm, q, base, points, **_structure_settings(config))
    report.results["linearization"] = dict(
        structure.to_dict(norm), q=q, order_divides_q=bool(structure.order and q % structure.order == 0)
    )
    alarms = structure.alarms(config.tolerances.check_tol)
    if alarms:
        report.alarms.extend(alarms)
        report.exit_code = worst_exit_code([report.exit_code, EXIT_ALARM])


def cmd_structure(config: ExperimentConfig) -> RunReport:
    """Fixed-point geometry with isometry and projection audits; exit 3 on alarm, 4 on empty Fix."""
    report, start, prepared = _certified("structure", config)
    if prepared is None:
        return _finish(report, start)
    norm, f = prepared

    results, points = _harvest(config, norm, f)
    if not points:
        report.alarms.append("NOT-CONVERGED from every start: Fix(f) may be empty")
        report.exit_code = EXIT_PRECONDITION
        report.results["best_residual"] = min(r.residual for r in results)
        return _finish(report, start)

    structure = analyze_structure(
        f, norm, points, oracle=config.oracle, oracle_box=config.box, **_structure_settings(config)
    )
    report.results["structure"] = structure.to_dict(norm)
    alarms = structure.alarms(config.tolerances.check_tol)
    if alarms:
        report.alarms.extend(alarms)
        report.exit_code = EXIT_ALARM
    if structure.unseparated_pairs:
        logger.warning("Locked sets look under-discovered; consider more starts")
    return _finish(report, start)


COMMAND_TABLE = {
    "certify": cmd_certify,
    "fix": cmd_fix,
    "orbit": cmd_orbit,
    "structure": cmd_structure,
}


def run_config(config: ExperimentConfig) -> RunReport:
    """Run the config's commands in order, stopping after a failed certificate."""
    start = time.time()
    report = RunReport("run", config.to_dict())
    for name in config.commands:
        part = COMMAND_TABLE[name](config)
        report.results[name] = part.results
        report.alarms.extend(f"{name}: {a}" for a in part.alarms)
        report.exit_code = worst_exit_code([report.exit_code, part.exit_code])
        if part.exit_code == EXIT_CERTIFICATE_FAIL:
            break
    report.timing["wall_clock_seconds"] = time.time() - start
    return report


def _summary_row(path: Path, config: Optional[ExperimentConfig], report: RunReport) -> dict:
    row = {"config": path.name, "exit_code": report.exit_code, "status": report.status}
    if config is None:
        return row
    row.update({"map": config.map.get("kind"), "norm": config.norm.get("kind"), "n": config.norm.get("n")})
    results = report.results
    cert = next((r["certificate"] for r in results.values() if isinstance(r, dict) and "certificate" in r), None)
    row["certificate"] = None if cert is None else cert["verdict"]
    orbit = results.get("orbit", {})
    if "q" in orbit:
        row.update(
            {
                "q": orbit["q"],
                "permutation_order_form": orbit["audit"]["verdicts"]["permutation_order_form"],
                "below_2n": orbit["audit"]["verdicts"]["below_2n"],
            }
        )
    structure = results.get("structure", {}).get("structure")
    if structure:
        projection = structure.get("projection_check") or {}
        isometry = structure.get("isometry_check") or {}
        row.update({"A2_defect": projection.get("A2_defect"), "isometry_defect": isometry.get("max_defect")})
    return row


def _settings(config: Optional[ExperimentConfig]) -> dict:
    return {} if config is None else config.to_dict()


def _run_file(path: Path, overrides: dict) -> Tuple[dict, dict]:
    """Run one config of a suite; a failing file becomes a row, never an abort."""
    config = None
    try:
        config = ExperimentConfig.from_yaml(str(path)).apply_environment()
        for key, value in overrides.items():
            if value is not None:
                setattr(config, key, value)
        report = run_config(config)
    except (ConfigError, FileNotFoundError) as e:
        logger.error(f"Config {path.name} rejected: {e}")
        report = RunReport("run", {}, alarms=[str(e)], exit_code=EXIT_CONFIG)
        config = None
    except SingularNormalizationError as e:
        logger.error(f"Run {path.name} cannot start: {e}")
        report = RunReport("run", _settings(config), alarms=[str(e)], exit_code=EXIT_PRECONDITION)
    except PolyfixError as e:
        logger.error(f"Run {path.name} failed: {e}")
        report = RunReport("run", _settings(config), alarms=[str(e)], exit_code=EXIT_ALARM)
    except Exception as e:
        logger.exception(f"Run {path.name} crashed")
        report = RunReport("run", _settings(config), alarms=[f"{type(e).__name__}: {e}"], exit_code=EXIT_CONFIG)
    return _summary_row(path, config, report), dict(report.to_dict(), file=path.name)


def cmd_suite(directory, seed: int = None, starts: int = None, threads: int = 1) -> RunReport:
    """Run every config in ``directory`` (sorted by name); exit is the worst run's code."""
    start = time.time()
    report = RunReport("suite", {"directory": str(directory), "seed": seed, "starts": starts})
    directory = Path(directory)
    paths = []
    if directory.is_dir():
        paths = sorted(p for p in directory.iterdir() if p.suffix in CONFIG_SUFFIXES)
    if not paths:
        report.alarms.append(f"no configs found in {directory}")
        report.exit_code = EXIT_CONFIG
        return _finish(report, start)

    overrides = {"seed": seed, "starts": starts}
    with concurrent.futures.ThreadPoolExecutor(max_workers=max(1, threads)) as executor:
        outcomes = list(executor.map(lambda p: _run_file(p, overrides), paths))

    report.rows = [row for row, _ in outcomes]
    report.results["runs"] = [run for _, run in outcomes]
    report.alarms = [f"{row['config']}: {row['status']}" for row in report.rows if row["exit_code"] != EXIT_OK]
    report.exit_code = worst_exit_code(row["exit_code"] for row in report.rows)
    return _finish(report, start)


def cmd_landau(n_max: int = 12) -> RunReport:
    """Table of permutation orders S(n), Landau's g(n), 2^(n-1) and e^(n/e)."""
    start = time.time()
    report = RunReport("landau", {"n_max": n_max})
    table = []
    for n in range(1, n_max + 1):
        g = landau(n)
        table.append(
            {
                "n": n,
                "orders": sorted(partitions_lcm_set(n)),
                "g": g,
                "two_pow_n_minus_1": 2 ** (n - 1),
                "exp_n_over_e": math.exp(n / math.e),
                "g_below_two_pow_n_minus_1": g < 2 ** (n - 1),
            }
        )
    report.results["table"] = table
    return _finish(report, start)
