"""
Locked sets of a nonexpansive map and the subspace V(f) they cut out.

Discovery is witness-driven: every ordered pair (v, w) of sampled fixed
points yields the locked face J(v - w), and the diagonal pair v = w yields
the full dual extreme set J(0). The true minimal locked sets can only be
under-discovered, so every minimality verdict is an upper approximation.
"""

import logging
from dataclasses import dataclass
from typing import Dict, Iterable, List, Sequence

import numpy as np

from dynamics.iteration import DEFAULT_FP_TOL, distinct_points, krasnoselskii
from maps.base import MapSpec, apply
from numerics.errors import ContainmentViolationError
from numerics.linalg import DEFAULT_TOL, Subspace, Vector, as_vector, intersect_all
from polynorm.duality import DualFace, duality_map, enumerate_faces, l_e_subspace
from polynorm.norms import PolyhedralNorm, norm_eval

logger = logging.getLogger(__name__)


@dataclass
class LockedSet:
    """A locked face E with witnesses v, w in S_E(f) and J(v - w) = E."""

    face: DualFace
    witness_v: Vector
    witness_w: Vector
    discovered_at: int = 0

    @property
    def diagonal(self) -> bool:
        return bool(np.array_equal(self.witness_v, self.witness_w))

    def to_dict(self, norm: PolyhedralNorm, offset: Vector = None) -> dict:
        shift = 0.0 if offset is None else offset
        return {
            "face": list(self.face.indices),
            "labels": self.face.labels(norm),
            "witness_v": (self.witness_v + shift).tolist(),
            "witness_w": (self.witness_w + shift).tolist(),
            "discovered_at": self.discovered_at,
        }


def s_e_member(f: MapSpec, norm: PolyhedralNorm, face: DualFace, x, tol: float = DEFAULT_TOL) -> bool:
    """x ∈ S_E(f): |phi(f(x)) - phi(x)| <= tol * max(1, ||x||) for every phi in E."""
    return s_e_defect(f, norm, face, x) <= tol * max(1.0, norm_eval(norm, as_vector(x, f.dim)))


def s_e_defect(f: MapSpec, norm: PolyhedralNorm, face: DualFace, x) -> float:
    x = as_vector(x, f.dim)
    rows = norm.dual_extremes[list(face.indices)]
    return float(np.abs(rows @ (apply(f, x) - x)).max()) if len(face) else 0.0


def find_locked_sets(
    f: MapSpec,
    norm: PolyhedralNorm,
    fixed_points: Sequence,
    tol: float = DEFAULT_TOL,
    separation: float = None,
) -> List[LockedSet]:
    """Locked faces J(v - w) witnessed by pairs of fixed points, merged by face.

    The first witness pair found for a face is kept; ``discovered_at`` is the
    index of the later point of that pair. The result is sorted by face key.

    Args:
        f: The map whose fixed points are given
        norm: Polyhedral norm supplying the dual extremes
        fixed_points: Sampled fixed points, in discovery order
        tol: Face membership tolerance
        separation: Pairs closer than this are skipped (default: 10 * tol)

    Returns:
        list: LockedSet records, one per distinct face
    """
    points = [as_vector(p, f.dim) for p in fixed_points]
    if not points:
        return []
    separation = 10.0 * tol if separation is None else separation
    found: Dict[DualFace, LockedSet] = {}

    full = DualFace.full(norm)
    found[full] = LockedSet(full, points[0], points[0], 0)

    for j in range(1, len(points)):
        for i in range(j):
            for v, w in ((points[i], points[j]), (points[j], points[i])):
                if norm_eval(norm, v - w) <= separation:
                    continue
                face = duality_map(norm, v - w, tol)
                if face in found:
                    continue
                if not (s_e_member(f, norm, face, v, tol) and s_e_member(f, norm, face, w, tol)):
                    logger.debug(f"pair ({i}, {j}) fails the S_E membership test for {face.indices}")
                    continue
                found[face] = LockedSet(face, v, w, j)

    locked = sorted(found.values(), key=lambda s: s.face.key)
    logger.info(f"Discovered {len(locked)} locked faces from {len(points)} fixed points")
    return locked


def minimal_locked(sets: Iterable[LockedSet]) -> List[LockedSet]:
    """Sets whose face contains no other discovered face as a proper subset."""
    sets = list(sets)
    return [
        s for s in sets if not any(t.face.is_proper_subset(s.face) for t in sets if t is not s)
    ]


def union_of_faces(sets: Iterable[LockedSet]) -> DualFace:
    """M(f) as an index set: the union of the (minimal) locked faces."""
    indices = set()
    for s in sets:
        indices.update(s.face.indices)
    return DualFace.of(indices)


def v_of_f(
    norm: PolyhedralNorm,
    minimal: Sequence[LockedSet],
    tol: float = DEFAULT_TOL,
    fixed_points: Sequence = (),
) -> Subspace:
    """V(f) = ∩ L_E over the minimal locked faces; checks Fix(f) ⊆ V(f) on samples.

    ``fixed_points`` must already be translated so that a fixed point sits at 0.
    """
    if not minimal:
        raise ValueError("v_of_f needs at least one minimal locked set")
    n = norm.ambient_dim
    v = intersect_all((l_e_subspace(norm, s.face, tol) for s in minimal), n, tol)
    for p in fixed_points:
        if not v.contains(p, tol):
            raise ContainmentViolationError(
                f"fixed point {np.round(p, 10).tolist()} lies outside V(f) (dim {v.dim}); "
                "locked sets are likely under-discovered"
            )
    return v


@dataclass
class DiscoveryCoverage:
    starts: int
    points: int
    distinct_faces: int
    last_new_face_at: int
    stabilized: bool

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def discovery_coverage(locked: Sequence[LockedSet], starts: int, points: int) -> DiscoveryCoverage:
    """Stabilized means no face was first witnessed in the second half of the points."""
    last = max((s.discovered_at for s in locked), default=0)
    return DiscoveryCoverage(starts, points, len(locked), last, last < max(1, points) / 2)


def locked_affine_check(
    f: MapSpec,
    norm: PolyhedralNorm,
    sets: Sequence[LockedSet],
    samples: int = 50,
    seed: int = 0,
    box: float = 2.0,
    tol: float = DEFAULT_TOL,
) -> float:
    """Largest S_E defect over sampled points of w + L_E (the affine spread of a locked set)."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for s in sets:
        l_e = l_e_subspace(norm, s.face, tol)
        for _ in range(samples if l_e.dim else 1):
            z = s.witness_w + l_e.point(rng.uniform(-box, box, l_e.dim))
            worst = max(worst, s_e_defect(f, norm, s.face, z))
    return worst


@dataclass
class SEqualityCheck:
    face: DualFace
    superset_defect: float
    members_sampled: int
    outside_affine: int

    def to_dict(self) -> dict:
        return {
            "face": list(self.face.indices),
            "superset_defect": self.superset_defect,
            "members_sampled": self.members_sampled,
            "outside_affine": self.outside_affine,
        }


def s_e_equality_check(
    f: MapSpec,
    norm: PolyhedralNorm,
    locked: LockedSet,
    samples: int = 200,
    seed: int = 0,
    box: float = 2.0,
    tol: float = DEFAULT_TOL,
) -> SEqualityCheck:
    """Sampled test of S_E(f) = w + L_E for a minimal locked set.

    The ⊇ direction samples w + L_E; the ⊆ direction samples the box, keeps
    members of S_E(f) and counts those outside w + L_E.
    """
    superset = locked_affine_check(f, norm, [locked], samples, seed, box, tol)
    l_e = l_e_subspace(norm, locked.face, tol)
    rng = np.random.default_rng(seed + 1)
    members = outside = 0
    for z in rng.uniform(-box, box, size=(samples, f.dim)):
        z = locked.witness_w + z
        if s_e_member(f, norm, locked.face, z, tol):
            members += 1
            if not l_e.contains(z - locked.witness_w, max(tol, 1e-9)):
                outside += 1
    return SEqualityCheck(locked.face, superset, members, outside)


def separation_check(
    norm: PolyhedralNorm,
    fixed_points: Sequence,
    faces: DualFace,
    tol: float = DEFAULT_TOL,
) -> int:
    """Number of fixed-point pairs (farther than 10 tol) that no phi in ``faces`` separates."""
    rows = norm.dual_extremes[list(faces.indices)]
    points = [np.asarray(p, dtype=float) for p in fixed_points]
    unseparated = 0
    for j in range(1, len(points)):
        for i in range(j):
            diff = points[i] - points[j]
            if norm_eval(norm, diff) <= 10.0 * tol:
                continue
            if rows.size == 0 or np.abs(rows @ diff).max() <= tol:
                unseparated += 1
    if unseparated:
        logger.warning(f"{unseparated} fixed-point pairs are not separated by M(f): under-discovery")
    return unseparated


def fixed_point_grid(
    f: MapSpec,
    norm: PolyhedralNorm,
    per_axis: int = 7,
    box: float = 3.0,
    fp_tol: float = DEFAULT_FP_TOL,
    max_iter: int = 20000,
    separation: float = 1e-6,
) -> List[Vector]:
    """Retract a regular grid of starts onto Fix(f); distinct converged points."""
    axes = [np.linspace(-box, box, per_axis)] * f.dim
    grid = np.array(np.meshgrid(*axes, indexing="ij")).reshape(f.dim, -1).T
    results = [krasnoselskii(f, x, fp_tol, max_iter, norm) for x in grid]
    return distinct_points([r.point for r in results if r.converged], norm, separation)


def oracle_minimal_locked_faces(
    f: MapSpec,
    norm: PolyhedralNorm,
    grid_points: Sequence,
    tol: float = DEFAULT_TOL,
    separation: float = 1e-6,
) -> List[DualFace]:
    """Brute force: every face of the dual ball, tested for lockedness against the grid."""
    points = [np.asarray(p, dtype=float) for p in grid_points]
    witnessed = {DualFace.full(norm)}
    for j in range(1, len(points)):
        for i in range(j):
            for diff in (points[i] - points[j], points[j] - points[i]):
                if norm_eval(norm, diff) > separation:
                    witnessed.add(duality_map(norm, diff, tol))
    locked = [face for face in enumerate_faces(norm, tol) if face in witnessed]
    minimal = [e for e in locked if not any(g.is_proper_subset(e) for g in locked)]
    return sorted(minimal, key=lambda e: e.key)
