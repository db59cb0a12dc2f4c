"""
Fixed points, the Krasnoselskii retract, periodic orbits and period audits.
"""

from .bounds import BoundAudit, audit_period
from .iteration import (
    FixedPointResult,
    averaged_iterates,
    harvest_fixed_points,
    krasnoselskii,
    retract,
)
from .orbits import Orbit, default_p_max, find_orbit, find_orbits, lcm_of_observed_periods, minimal_period

__all__ = [
    "BoundAudit",
    "FixedPointResult",
    "Orbit",
    "audit_period",
    "averaged_iterates",
    "default_p_max",
    "find_orbit",
    "find_orbits",
    "harvest_fixed_points",
    "krasnoselskii",
    "lcm_of_observed_periods",
    "minimal_period",
    "retract",
]
