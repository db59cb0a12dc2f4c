"""
The derivative A of the retract R at a point of V(f), and the audits that
make A a nonexpansive projection and R an isometry from W = A(V) onto Fix(f).
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from dynamics.iteration import DEFAULT_FP_TOL, DEFAULT_MAX_ITER, averaged_iterates, krasnoselskii
from maps.base import MapSpec
from maps.certify import operator_norm, operator_norm_is_exact
from numerics.errors import NoDifferentiablePointError
from numerics.linalg import Matrix, Subspace, Vector, as_matrix, as_vector
from polynorm.duality import DualFace
from polynorm.norms import PolyhedralNorm, make_linf, norm_eval, norm_eval_many

logger = logging.getLogger(__name__)

DEFAULT_STEP = 1e-5
DEFAULT_RETRY_BUDGET = 16
DEFAULT_CHECK_TOL = 1e-7
# averaged steps are taken until the residual is at this level, so that the
# difference quotient sees T^k rather than the error of T^k against R
DERIVATIVE_FP_TOL = 1e-13


@dataclass
class RetractDerivative:
    matrix: Matrix
    point: Vector
    attempts: int
    defect: float

    def to_dict(self) -> dict:
        return {
            "A": self.matrix.tolist(),
            "u": self.point.tolist(),
            "attempts": self.attempts,
            "A2_defect": self.defect,
        }


def projection_defect(matrix) -> float:
    """max-entry |A^2 - A|."""
    a = as_matrix(matrix)
    return float(np.abs(a @ a - a).max()) if a.size else 0.0


def _difference_quotient(f, v: Subspace, u, h, fp_tol, max_iter, norm) -> Matrix:
    steps = [u + s * h * v.basis[:, j] for j in range(v.dim) for s in (1.0, -1.0)]
    images = averaged_iterates(f, steps, fp_tol, max_iter, norm)
    columns = (images[0::2] - images[1::2]) / (2.0 * h)
    # columns are the images of the basis of V; A vanishes on its complement
    return columns.T @ v.basis.T


def derivative_of_retract(
    f: MapSpec,
    v: Subspace,
    u: Optional[Vector] = None,
    h: float = DEFAULT_STEP,
    fp_tol: float = DEFAULT_FP_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    check_tol: float = DEFAULT_CHECK_TOL,
    retry_budget: int = DEFAULT_RETRY_BUDGET,
    seed: int = 0,
    box: float = 1.0,
    norm: PolyhedralNorm = None,
) -> RetractDerivative:
    """Central differences of R along a basis of V at u.

    When ``u`` is None, or the A^2 - A defect at a point exceeds ``check_tol``,
    a fresh u is drawn uniformly from the box in V coordinates, up to
    ``retry_budget`` attempts in total.

    Args:
        f: Map whose retract is differentiated, with a fixed point at 0
        v: The subspace V(f)
        u: First point to try, or None to sample one
        h: Difference step
        check_tol: Largest A^2 - A defect accepted

    Returns:
        RetractDerivative: the matrix A, the point u and the attempt count

    Raises:
        NoDifferentiablePointError: No attempt met ``check_tol``
    """
    if h <= 0:
        raise ValueError("finite-difference step h must be positive")
    n = v.ambient_dim
    norm = norm or make_linf(n)
    if u is not None:
        u = as_vector(u, n)
        if not v.contains(u, max(check_tol, 1e-9)):
            raise ValueError(f"u = {u.tolist()} is not in V")
    if v.dim == 0:
        return RetractDerivative(np.zeros((n, n)), np.zeros(n), 0, 0.0)

    tight = min(fp_tol, DERIVATIVE_FP_TOL)
    rng = np.random.default_rng(seed)
    best = None
    for attempt in range(1, max(1, retry_budget) + 1):
        point = u if (attempt == 1 and u is not None) else v.point(rng.uniform(-box, box, v.dim))
        matrix = _difference_quotient(f, v, point, h, tight, max_iter, norm)
        defect = projection_defect(matrix)
        if best is None or defect < best.defect:
            best = RetractDerivative(matrix, point, attempt, defect)
        if defect <= check_tol:
            logger.info(f"Derivative of the retract found after {attempt} attempt(s), defect {defect:.3e}")
            return best
        logger.debug(f"attempt {attempt}: A^2 - A defect {defect:.3e} above {check_tol:g}, resampling u")
    raise NoDifferentiablePointError(
        f"no point of V with A^2 - A defect <= {check_tol:g} in {retry_budget} attempts "
        f"(best {best.defect:.3e})"
    )


def image_of(matrix, v: Subspace, tol: float = DEFAULT_CHECK_TOL) -> Subspace:
    """W = A(V), the column space of A restricted to V."""
    if v.dim == 0:
        return Subspace.zero(v.ambient_dim)
    return Subspace.span((as_matrix(matrix) @ v.basis).T, v.ambient_dim, tol)


@dataclass
class ProjectionCheck:
    a2_defect: float
    opnorm_estimate: float
    nonexpansive: bool
    method: str

    def to_dict(self) -> dict:
        return {
            "A2_defect": self.a2_defect,
            "opnorm_estimate": self.opnorm_estimate,
            "nonexpansive": self.nonexpansive,
            "method": self.method,
        }


def verify_projection(
    matrix,
    norm: PolyhedralNorm,
    tol: float = DEFAULT_CHECK_TOL,
    v: Subspace = None,
    samples: int = 2000,
    seed: int = 0,
) -> ProjectionCheck:
    """A^2 = A and ||A|| <= 1, the operator norm taken over V when V is proper.

    The norm is exact for ℓ1/ℓ∞ on the whole space and sampled otherwise.
    """
    a = as_matrix(matrix)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError(f"A must be square, got shape {a.shape}")
    defect = projection_defect(a)
    if v is None or v.dim == n:
        estimate = operator_norm(a, norm, samples, seed)
        method = "exact-operator-norm" if operator_norm_is_exact(norm) else "sampled"
    elif v.dim == 0:
        estimate, method = 0.0, "vacuous"
    else:
        rng = np.random.default_rng(seed)
        xs = np.vstack([v.basis.T, rng.standard_normal((samples, v.dim)) @ v.basis.T])
        denominators = norm_eval_many(norm, xs)
        keep = denominators > 0
        estimate = float((norm_eval_many(norm, xs[keep] @ a.T) / denominators[keep]).max())
        method = "sampled-on-V"
    return ProjectionCheck(defect, estimate, estimate <= 1.0 + tol, method)


@dataclass
class IsometryCheck:
    pairs: int
    max_defect: float
    inverse_defect: float

    def to_dict(self) -> dict:
        return {"pairs": self.pairs, "max_defect": self.max_defect, "inverse_defect": self.inverse_defect}


def verify_isometry(
    f: MapSpec,
    matrix,
    w: Subspace,
    norm: PolyhedralNorm,
    samples: int = 200,
    seed: int = 0,
    fp_tol: float = DEFAULT_FP_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    box: float = 1.0,
) -> IsometryCheck:
    """| ||R(x) - R(y)|| - ||x - y|| | over sampled pairs of W, and ||A R(x) - x||.

    ``samples`` + 1 points are drawn from W and paired consecutively.
    """
    if w.dim == 0:
        return IsometryCheck(0, 0.0, 0.0)
    a = as_matrix(matrix)
    rng = np.random.default_rng(seed)
    xs = rng.uniform(-box, box, size=(samples + 1, w.dim)) @ w.basis.T
    rs = np.array([krasnoselskii(f, x, fp_tol, max_iter, norm).point for x in xs])
    image_gaps = norm_eval_many(norm, rs[1:] - rs[:-1])
    gaps = norm_eval_many(norm, xs[1:] - xs[:-1])
    max_defect = float(np.abs(image_gaps - gaps).max())
    inverse = float(norm_eval_many(norm, rs @ a.T - xs).max())
    logger.info(f"Isometry audit over {samples} pairs: defect {max_defect:.3e}, inverse {inverse:.3e}")
    return IsometryCheck(samples, max_defect, inverse)


def value_preservation_defect(
    f: MapSpec,
    matrix,
    v: Subspace,
    norm: PolyhedralNorm,
    faces: DualFace,
    samples: int = 200,
    seed: int = 0,
    fp_tol: float = DEFAULT_FP_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    box: float = 1.0,
) -> float:
    """max |phi(R(x)) - phi(x)| and |phi(Ax) - phi(x)| for phi in M(f), x sampled in V."""
    if v.dim == 0 or len(faces) == 0:
        return 0.0
    a = as_matrix(matrix)
    rows = norm.dual_extremes[list(faces.indices)]
    rng = np.random.default_rng(seed)
    worst = 0.0
    for x in rng.uniform(-box, box, size=(samples, v.dim)) @ v.basis.T:
        rx = krasnoselskii(f, x, fp_tol, max_iter, norm).point
        worst = max(worst, float(np.abs(rows @ (rx - x)).max()), float(np.abs(rows @ (a @ x - x)).max()))
    return worst


def retract_idempotence_defect(
    f: MapSpec,
    x,
    norm: PolyhedralNorm,
    fp_tol: float = DEFAULT_FP_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> float:
    """||R(R(x)) - R(x)||."""
    once = krasnoselskii(f, x, fp_tol, max_iter, norm).point
    twice = krasnoselskii(f, once, fp_tol, max_iter, norm).point
    return norm_eval(norm, twice - once)
