"""
Krasnoselskii iteration x <- (f(x) + x) / 2 and the retract R it defines.
"""

import concurrent.futures
import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from maps.base import MapSpec, apply
from numerics.errors import NotConvergedError
from numerics.linalg import Vector, as_vector
from polynorm.norms import PolyhedralNorm, make_linf, norm_eval

logger = logging.getLogger(__name__)

DEFAULT_FP_TOL = 1e-10
DEFAULT_MAX_ITER = 20000


@dataclass
class FixedPointResult:
    """Best Krasnoselskii iterate; ``converged`` is False for NOT-CONVERGED."""

    point: Vector
    iterations: int
    residual: float
    converged: bool
    start: Optional[Vector] = None
    residual_history: List[float] = field(default_factory=list, repr=False)

    @property
    def status(self) -> str:
        return "CONVERGED" if self.converged else "NOT-CONVERGED"

    def to_dict(self) -> dict:
        return {
            "point": self.point.tolist(),
            "iterations": self.iterations,
            "residual": self.residual,
            "status": self.status,
        }


def krasnoselskii(
    f: MapSpec,
    x0,
    fp_tol: float = DEFAULT_FP_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    norm: PolyhedralNorm = None,
) -> FixedPointResult:
    """Iterate x_{k+1} = f(x_k)/2 + x_k/2 until ||f(x_k) - x_k|| <= fp_tol.

    On exhaustion the lowest-residual iterate is returned flagged NOT-CONVERGED;
    Fix(f) may be empty.

    Args:
        f: A nonexpansive map
        x0: Starting point
        fp_tol: Residual at which the iteration stops
        max_iter: Iteration budget
        norm: Norm measuring the residual (the sup norm when None)

    Returns:
        FixedPointResult: point, residual history, iteration count and status
    """
    if fp_tol <= 0:
        raise ValueError("fp_tol must be positive")
    x = as_vector(x0, f.dim)
    start = x.copy()
    norm = norm or make_linf(f.dim)
    history = []
    best_point, best_residual, best_iter = x, np.inf, 0
    for k in range(max_iter + 1):
        fx = apply(f, x)
        residual = norm_eval(norm, fx - x)
        history.append(residual)
        if residual < best_residual:
            best_point, best_residual, best_iter = x, residual, k
        if residual <= fp_tol:
            return FixedPointResult(x, k, residual, True, start, history)
        if k < max_iter:
            x = 0.5 * (fx + x)
    logger.debug(f"Krasnoselskii not converged after {max_iter} iterations, residual {best_residual:.3e}")
    return FixedPointResult(best_point, best_iter, best_residual, False, start, history)


def retract(
    f: MapSpec,
    x,
    fp_tol: float = DEFAULT_FP_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    norm: PolyhedralNorm = None,
    strict: bool = False,
) -> Vector:
    """R(x), the limit of the averaged iterates started at x."""
    result = krasnoselskii(f, x, fp_tol, max_iter, norm)
    if not result.converged:
        if strict:
            raise NotConvergedError(
                f"retract did not converge from {result.start.tolist()} (residual {result.residual:.3e})"
            )
        logger.warning(f"retract returning NOT-CONVERGED iterate (residual {result.residual:.3e})")
    return result.point


def averaged_iterates(
    f: MapSpec,
    points: Sequence,
    fp_tol: float = DEFAULT_FP_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    norm: PolyhedralNorm = None,
) -> np.ndarray:
    """Apply the same number k of averaged steps to every point.

    k is the first count at which every residual is <= fp_tol (or max_iter), so
    nearby points are pushed through one common smooth map T^k.
    """
    norm = norm or make_linf(f.dim)
    xs = np.array([as_vector(p, f.dim) for p in points])
    for k in range(max_iter):
        fxs = np.array([f.evaluate(x) for x in xs])
        if max(norm_eval(norm, fx - x) for fx, x in zip(fxs, xs)) <= fp_tol:
            break
        xs = 0.5 * (fxs + xs)
    else:
        logger.debug(f"averaged_iterates hit max_iter={max_iter}")
    return xs


def sample_starts(dim: int, starts: int, seed: int, box: float) -> np.ndarray:
    """Uniform starting points in [-box, box]^dim, reproducible from the seed."""
    rng = np.random.default_rng(seed)
    return rng.uniform(-box, box, size=(starts, dim))


def harvest_fixed_points(
    f: MapSpec,
    norm: PolyhedralNorm,
    starts: int,
    seed: int,
    box: float = 4.0,
    fp_tol: float = DEFAULT_FP_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    workers: int = 1,
) -> List[FixedPointResult]:
    """Run Krasnoselskii from ``starts`` random points; results are in start order."""
    initial = sample_starts(f.dim, starts, seed, box)
    with concurrent.futures.ThreadPoolExecutor(max_workers=max(1, workers)) as executor:
        results = list(executor.map(lambda x0: krasnoselskii(f, x0, fp_tol, max_iter, norm), initial))
    converged = sum(r.converged for r in results)
    logger.info(f"Harvested {converged}/{starts} converged fixed points")
    return results


def distinct_points(points: Sequence, norm: PolyhedralNorm, separation: float) -> List[Vector]:
    """Keep the first of every group of points closer than ``separation``."""
    kept: List[Vector] = []
    for p in points:
        if all(norm_eval(norm, p - q) > separation for q in kept):
            kept.append(np.asarray(p, dtype=float))
    return kept
