"""
Periodic orbit detection for nonexpansive maps.

Orbits are found by near-recurrence over a sliding window of candidate
periods p = 1..p_max, refined by Krasnoselskii iteration on f^p, and reduced
to the minimal period by testing the divisors of p.
"""

import concurrent.futures
import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Union

import numpy as np

from dynamics.iteration import DEFAULT_FP_TOL, krasnoselskii, sample_starts
from maps.base import MapSpec, apply
from maps.families import Iterate
from numerics.combinatorics import best_known_bound, divisors, lcm_all
from numerics.errors import AmbiguousPeriodError, NoOrbitFoundError
from numerics.linalg import Vector, as_vector
from polynorm.norms import PolyhedralNorm, norm_eval, norm_eval_many

logger = logging.getLogger(__name__)

DEFAULT_ORBIT_TOL = 1e-8
AMBIGUITY_FACTOR = 10.0
DEFAULT_P_MAX_CAP = 4096



def default_p_max(n: int, p_norm=None, cap: int = DEFAULT_P_MAX_CAP) -> int:
    """
    Largest candidate period scanned by the orbit search.

    Args:
        n: Ambient dimension
        p_norm: 1 or "inf" for the ℓ1/ℓ∞ norms, None for a custom norm
        cap: Configured upper limit (caps.p_max)

    Returns:
        int: min(2^n max_k C(n, k), cap) for ℓ1/ℓ∞, which every period
             respects; the cap alone for custom norms, where it is heuristic
    """
    if cap < 1:
        raise ValueError("p_max cap must be at least 1")
    if p_norm in (1, "inf"):
        return min(best_known_bound(n), cap)
    return cap


@dataclass
class Orbit:
    """A periodic orbit xi, f(xi), ..., f^{q-1}(xi)."""

    representative: Vector
    points: List[Vector]
    minimal_period: int
    candidate_period: int
    iterations: int
    start: Vector = None

    def to_dict(self) -> dict:
        return {
            "start": None if self.start is None else self.start.tolist(),
            "representative": self.representative.tolist(),
            "points": [p.tolist() for p in self.points],
            "minimal_period": self.minimal_period,
            "candidate_period": self.candidate_period,
            "iterations": self.iterations,
        }


def find_orbit(
    f: MapSpec,
    x0,
    norm: PolyhedralNorm,
    orbit_tol: float = DEFAULT_ORBIT_TOL,
    max_iter: int = 20000,
    p_max: Optional[int] = None,
    fp_tol: float = DEFAULT_FP_TOL,
) -> Orbit:
    """Detect the periodic orbit that f^k(x0) approaches.

    Raises NoOrbitFoundError when no ||f^{k+p}(x) - f^k(x)|| < orbit_tol is
    seen within ``max_iter`` steps. ``p_max`` defaults to default_p_max.
    """
    x = as_vector(x0, f.dim)
    if p_max is None:
        p_max = default_p_max(f.dim, norm.p_norm)
    start = x.copy()
    window = np.empty((p_max, f.dim))
    filled = 0
    for k in range(max_iter):
        if filled:
            recent = window[:filled]
            # row j of the window holds f^{k-1-j}(x0)
            gaps = norm_eval_many(norm, recent - x)
            hits = np.flatnonzero(gaps < orbit_tol)
            if hits.size:
                p = int(hits[0]) + 1
                return _refine(f, x, p, norm, orbit_tol, fp_tol, max_iter, k, start)
        window[1:] = window[:-1].copy()
        window[0] = x
        filled = min(filled + 1, p_max)
        x = apply(f, x)
    raise NoOrbitFoundError(
        f"no recurrence with period <= {p_max} within {max_iter} iterations from {start.tolist()}"
    )


def _refine(f, x, p, norm, orbit_tol, fp_tol, max_iter, k, start) -> Orbit:
    fixed = krasnoselskii(Iterate(f, p), x, fp_tol, max_iter, norm)
    xi = fixed.point if fixed.converged else x
    if not fixed.converged:
        logger.debug(f"Krasnoselskii on f^{p} did not converge; using the recurrent iterate")
    q = minimal_period(f, xi, p, norm, orbit_tol)
    points = [xi]
    for _ in range(q - 1):
        points.append(apply(f, points[-1]))
    return Orbit(xi, points, q, p, k + fixed.iterations, start)


def minimal_period(
    f: MapSpec,
    xi,
    p: int,
    norm: PolyhedralNorm,
    orbit_tol: float = DEFAULT_ORBIT_TOL,
) -> int:
    """Smallest divisor d of p with ||f^d(xi) - xi|| < orbit_tol.

    Raises AmbiguousPeriodError when a distance lands in [orbit_tol, 10 orbit_tol).
    """
    xi = as_vector(xi, f.dim)
    orbit = [xi]
    for _ in range(p):
        orbit.append(apply(f, orbit[-1]))
    closing = norm_eval(norm, orbit[p] - xi)
    if closing >= orbit_tol:
        raise ValueError(f"f^{p}(xi) is {closing:.3e} from xi; xi is not p-periodic")

    ambiguous = AMBIGUITY_FACTOR * orbit_tol
    period = p
    for d in divisors(p):
        gap = norm_eval(norm, orbit[d] - xi)
        if gap < orbit_tol:
            period = d
            break
        if gap < ambiguous:
            raise AmbiguousPeriodError(
                f"f^{d}(xi) is {gap:.3e} from xi, inside [orbit_tol, {AMBIGUITY_FACTOR:g} orbit_tol)"
            )

    points = np.array(orbit[:period])
    for i in range(period):
        gaps = norm_eval_many(norm, points[i + 1 :] - points[i])
        if gaps.size and gaps.min() < ambiguous:
            raise AmbiguousPeriodError(
                f"orbit points {i} and {i + 1 + int(gaps.argmin())} are only {gaps.min():.3e} apart"
            )
    return period


def find_orbits(
    f: MapSpec,
    norm: PolyhedralNorm,
    starts: int,
    seed: int,
    box: float = 4.0,
    orbit_tol: float = DEFAULT_ORBIT_TOL,
    max_iter: int = 20000,
    p_max: Optional[int] = None,
    fp_tol: float = DEFAULT_FP_TOL,
    workers: int = 1,
) -> List[Union[Orbit, Exception]]:
    """find_orbit from ``starts`` random points; failures are returned in place."""

    def run(x0):
        try:
            return find_orbit(f, x0, norm, orbit_tol, max_iter, p_max, fp_tol)
        except (NoOrbitFoundError, AmbiguousPeriodError) as e:
            logger.warning(f"Orbit search from {np.round(x0, 6).tolist()} failed: {e}")
            return e

    initial = sample_starts(f.dim, starts, seed, box)
    with concurrent.futures.ThreadPoolExecutor(max_workers=max(1, workers)) as executor:
        return list(executor.map(run, initial))


def lcm_of_observed_periods(orbits: Sequence[Union[Orbit, int]]) -> int:
    """lcm of the minimal periods q_x (plain integers are accepted as periods)."""
    if not orbits:
        raise ValueError("need at least one orbit")
    return lcm_all([o.minimal_period if isinstance(o, Orbit) else int(o) for o in orbits])
