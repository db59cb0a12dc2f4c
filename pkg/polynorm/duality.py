"""
Duality maps, dual faces, the subspaces L_E and faces F_E of the unit ball.

A face of the dual ball is stored by the indices of the dual extremes it
contains. Membership in J(x) uses the relative tolerance
``tol * max(1, ||x||)``; this is the single knob deciding face membership.
"""

import logging
import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, List, Optional, Tuple

import numpy as np
import scipy.optimize

from numerics.errors import DimensionMismatchError, OutOfRangeError
from numerics.linalg import DEFAULT_TOL, Subspace, Vector, as_vector, nullspace
from polynorm.norms import PolyhedralNorm, norm_eval

logger = logging.getLogger(__name__)

MAX_ENUMERATED_EXTREMES = 16


@dataclass(frozen=True)
class DualFace:
    """A face of B_{X*}, as a sorted tuple of dual-extreme indices."""

    indices: Tuple[int, ...]

    @classmethod
    def of(cls, indices: Iterable[int]) -> "DualFace":
        return cls(tuple(sorted(set(int(i) for i in indices))))

    @classmethod
    def full(cls, norm: PolyhedralNorm) -> "DualFace":
        return cls(tuple(range(norm.size)))

    def __len__(self) -> int:
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)

    def issubset(self, other: "DualFace") -> bool:
        return set(self.indices) <= set(other.indices)

    def is_proper_subset(self, other: "DualFace") -> bool:
        return self.issubset(other) and len(self) < len(other)

    @property
    def key(self) -> Tuple[int, Tuple[int, ...]]:
        """Sort key: smaller faces first, then lexicographic."""
        return (len(self.indices), self.indices)

    def labels(self, norm: PolyhedralNorm) -> List[str]:
        return [norm.label(i) for i in self.indices]


def _check_dim(norm: PolyhedralNorm, x) -> Vector:
    x = as_vector(x)
    if x.size != norm.ambient_dim:
        raise DimensionMismatchError(
            f"vector of length {x.size} does not match norm on R^{norm.ambient_dim}"
        )
    return x


def duality_map(norm: PolyhedralNorm, x, tol: float = DEFAULT_TOL) -> DualFace:
    """J(x): indices of the dual extremes with phi(x) >= ||x|| - tol * max(1, ||x||).

    For x = 0 every extreme attains the maximum, so J(0) is the whole dual ball.
    """
    if tol < 0:
        raise ValueError("tol must be non-negative")
    x = _check_dim(norm, x)
    values = norm.dual_extremes @ x
    nx = max(0.0, float(values.max()))
    threshold = nx - tol * max(1.0, nx)
    return DualFace.of(np.flatnonzero(values >= threshold))


def stability_radius(norm: PolyhedralNorm, x, tol: float = DEFAULT_TOL) -> float:
    """
    Radius eps with J(x + y) ⊆ J(x) whenever ||y|| <= eps.

    Every dual extreme has dual norm at most 1, so a perturbation of size
    eps moves each phi(x) and ||x|| by at most eps. With gap g = ||x|| minus
    the largest phi(x) outside J(x), an outside extreme stays outside
    J(x + y) as long as g - 2 eps > tol * max(1, ||x|| + eps).

    Args:
        norm: The polyhedral norm
        x: Base point
        tol: The same membership tolerance handed to duality_map

    Returns:
        float: min(g / 4, b / 2) where b solves the band condition with
               equality; 0.0 if rounding leaves no admissible radius,
               inf when x = 0 or J(x) is every extreme
    """
    x = _check_dim(norm, x)
    nx = norm_eval(norm, x)
    if nx == 0.0:
        return math.inf
    face = duality_map(norm, x, tol)
    outside = np.setdiff1d(np.arange(norm.size), face.indices)
    if outside.size == 0:
        return math.inf
    gap = nx - float((norm.dual_extremes[outside] @ x).max())
    # g - 2 eps > tol (||x|| + eps) and g - 2 eps > tol both hold below b
    band = (gap - tol * max(1.0, nx)) / (2.0 + tol)
    if band <= 0.0:
        return 0.0
    return min(gap / 4.0, band / 2.0)


def l_e_subspace(norm: PolyhedralNorm, face: DualFace, tol: float = DEFAULT_TOL) -> Subspace:
    """L_E = {x : phi(x) = psi(x) for all phi, psi in E}."""
    if len(face) == 0:
        raise ValueError("L_E needs a nonempty face")
    rows = norm.dual_extremes[list(face.indices)]
    if len(face) == 1:
        return Subspace.full(norm.ambient_dim)
    return nullspace(rows[1:] - rows[0], tol)


def _relative_interior_point(
    norm: PolyhedralNorm, face: DualFace
) -> Tuple[Optional[Vector], float]:
    """Maximise the slack t of the extremes outside E on the set {phi(x) = 1, phi in E}.

    Returns (x, t); t > 0 means E is exposed and x lies in the relative
    interior of F_E.
    """
    n = norm.ambient_dim
    inside = norm.dual_extremes[list(face.indices)]
    outside_idx = np.setdiff1d(np.arange(norm.size), face.indices)
    outside = norm.dual_extremes[outside_idx]

    cost = np.zeros(n + 1)
    cost[-1] = -1.0
    a_eq = np.hstack([inside, np.zeros((inside.shape[0], 1))])
    b_eq = np.ones(inside.shape[0])
    if outside.shape[0]:
        a_ub = np.hstack([outside, np.ones((outside.shape[0], 1))])
        b_ub = np.ones(outside.shape[0])
    else:
        a_ub, b_ub = None, None
    result = scipy.optimize.linprog(
        cost,
        A_ub=a_ub,
        b_ub=b_ub,
        A_eq=a_eq,
        b_eq=b_eq,
        bounds=[(None, None)] * n + [(None, 1.0)],
        method="highs",
    )
    if result.status != 0:
        return None, -math.inf
    return result.x[:n], float(result.x[-1])


def is_exposed_face(norm: PolyhedralNorm, face: DualFace, tol: float = DEFAULT_TOL) -> bool:
    """True when E = J(y) for some y != 0."""
    _, slack = _relative_interior_point(norm, face)
    return slack > tol


@dataclass
class FaceSample:
    """Sampled points of F_E and the span check against L_E."""

    face: DualFace
    points: List[Vector] = field(default_factory=list)
    span: Optional[Subspace] = None
    l_e: Optional[Subspace] = None
    spans_match: bool = False

    @property
    def empty(self) -> bool:
        return not self.points


def face_of_ball(
    norm: PolyhedralNorm,
    face: DualFace,
    tol: float = DEFAULT_TOL,
    draws: int = 32,
    seed: int = 0,
) -> FaceSample:
    """Sample F_E = {x in B_X : phi(x) = 1 for phi in E} and compare span(F_E) with L_E.

    A relative-interior point comes from an LP; further points move along
    random directions in L_E ∩ ker(phi_0) up to the boundary of the ball.
    An empty face (E not exposed, e.g. E = J(0)) is reported with no points
    and compared against the zero subspace.
    """
    n = norm.ambient_dim
    l_e = l_e_subspace(norm, face, tol)
    center, slack = _relative_interior_point(norm, face)
    if center is None or slack <= tol:
        logger.debug(f"face {face.indices} has no relative interior; reporting empty")
        span = Subspace.zero(n)
        return FaceSample(face, [], span, l_e, span.equals(l_e, tol))

    phi0 = norm.dual_extremes[face.indices[0]]
    directions = _intersect_with_kernel(l_e, phi0, tol)
    outside_idx = np.setdiff1d(np.arange(norm.size), face.indices)
    outside = norm.dual_extremes[outside_idx]

    rng = np.random.default_rng(seed)
    points = [center]
    if directions.dim > 0:
        for _ in range(draws):
            d = directions.point(rng.standard_normal(directions.dim))
            lo, hi = _step_limits(outside, center, d)
            step = rng.uniform(lo, hi)
            points.append(center + step * d)

    span = Subspace.span(points, n, tol)
    return FaceSample(face, points, span, l_e, span.equals(l_e, max(tol, 1e-9)))


def _intersect_with_kernel(sub: Subspace, phi: Vector, tol: float) -> Subspace:
    if sub.dim == 0:
        return sub
    coeffs = nullspace((phi @ sub.basis).reshape(1, -1), tol)
    if coeffs.dim == 0:
        return Subspace.zero(sub.ambient_dim)
    return Subspace.span((sub.basis @ coeffs.basis).T, sub.ambient_dim, tol)


def _step_limits(outside: np.ndarray, center: Vector, d: Vector) -> Tuple[float, float]:
    """Largest interval of s with psi(center + s d) <= 1 for every psi outside E."""
    lo, hi = -math.inf, math.inf
    slack = 1.0 - outside @ center
    rate = outside @ d
    for s, r in zip(slack, rate):
        if r > 0:
            hi = min(hi, s / r)
        elif r < 0:
            lo = max(lo, s / r)
    if not math.isfinite(lo) or not math.isfinite(hi):
        raise OutOfRangeError("face direction is unbounded; norm is not positive definite")
    return lo, hi


def enumerate_faces(norm: PolyhedralNorm, tol: float = DEFAULT_TOL) -> List[DualFace]:
    """Every exposed face J(y), y != 0, of the dual ball plus the full set J(0)."""
    if norm.size > MAX_ENUMERATED_EXTREMES:
        raise OutOfRangeError(
            f"face enumeration is limited to {MAX_ENUMERATED_EXTREMES} dual extremes, "
            f"norm has {norm.size}"
        )
    faces = []
    for size in range(1, norm.size):
        for subset in combinations(range(norm.size), size):
            face = DualFace(subset)
            if is_exposed_face(norm, face, tol):
                faces.append(face)
    faces.append(DualFace.full(norm))
    logger.debug(f"enumerated {len(faces)} faces of a dual ball with {norm.size} extremes")
    return faces
