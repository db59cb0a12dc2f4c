"""
End-to-end fixed-point geometry: from sampled fixed points to V(f), the
projection A, the subspace W and the audited linear action on W.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from dynamics.iteration import DEFAULT_FP_TOL, DEFAULT_MAX_ITER, distinct_points
from maps.base import MapSpec
from maps.families import Conjugated, Iterate
from numerics.errors import (
    ContainmentViolationError,
    LinearityViolationError,
    NoDifferentiablePointError,
    StructureMismatchError,
)
from numerics.linalg import DEFAULT_TOL, Matrix, Subspace, Vector
from polynorm.norms import PolyhedralNorm
from structure.derivative import (
    DEFAULT_CHECK_TOL,
    DEFAULT_RETRY_BUDGET,
    DEFAULT_STEP,
    IsometryCheck,
    ProjectionCheck,
    RetractDerivative,
    derivative_of_retract,
    image_of,
    value_preservation_defect,
    verify_isometry,
    verify_projection,
)
from structure.linearize import Extension, Linearization, extend_linearization, linear_order, linearize_on_fix
from structure.locked import (
    DiscoveryCoverage,
    LockedSet,
    SEqualityCheck,
    discovery_coverage,
    find_locked_sets,
    fixed_point_grid,
    locked_affine_check,
    minimal_locked,
    oracle_minimal_locked_faces,
    s_e_equality_check,
    separation_check,
    union_of_faces,
    v_of_f,
)
from structure.projections import partition_support, projection_l1, projection_linf, support_of_v

logger = logging.getLogger(__name__)

ORACLE_MAX_DIM = 3
POINT_SEPARATION = 1e-6


@dataclass
class StructureReport:
    """Fixed-point geometry of one map, in the frame where ``basepoint`` sits at 0."""

    basepoint: Vector
    fixed_points: List[Vector]
    locked: List[LockedSet] = field(default_factory=list)
    minimal_locked: List[LockedSet] = field(default_factory=list)
    V: Optional[Subspace] = None
    derivative: Optional[RetractDerivative] = None
    W: Optional[Subspace] = None
    isometry_check: Optional[IsometryCheck] = None
    projection_check: Optional[ProjectionCheck] = None
    value_preservation: Optional[float] = None
    locked_affine_defect: Optional[float] = None
    s_e_checks: List[SEqualityCheck] = field(default_factory=list)
    unseparated_pairs: int = 0
    coverage: Optional[DiscoveryCoverage] = None
    classes: Optional[list] = None
    linear_projection: Optional[Matrix] = None
    linearization: Optional[Linearization] = None
    extension: Optional[Extension] = None
    order: Optional[int] = None
    oracle: Optional[dict] = None
    failures: Dict[str, str] = field(default_factory=dict)

    @property
    def A(self) -> Optional[Matrix]:
        return None if self.derivative is None else self.derivative.matrix

    def defects(self) -> Dict[str, float]:
        found = {}
        if self.projection_check is not None:
            found["A2_defect"] = self.projection_check.a2_defect
            found["projection_opnorm_excess"] = max(0.0, self.projection_check.opnorm_estimate - 1.0)
        if self.isometry_check is not None:
            found["isometry_defect"] = self.isometry_check.max_defect
            found["inverse_defect"] = self.isometry_check.inverse_defect
        if self.value_preservation is not None:
            found["value_preservation_defect"] = self.value_preservation
        if self.locked_affine_defect is not None:
            found["locked_affine_defect"] = self.locked_affine_defect
        if self.extension is not None:
            found["extension_opnorm_excess"] = max(0.0, self.extension.opnorm - 1.0)
            found["extension_agreement"] = self.extension.agreement_on_w
        return found

    def alarms(self, check_tol: float) -> List[str]:
        """Audits that failed; under-discovery alone is not an alarm."""
        raised = [f"{stage}: {message}" for stage, message in self.failures.items()]
        raised += [f"{name} = {value:.3e}" for name, value in self.defects().items() if value > check_tol]
        if self.oracle is not None and not self.oracle["match"]:
            raised.append("oracle minimal faces differ from discovered minimal faces")
        return raised

    def _derivative_dict(self) -> dict:
        # u was chosen in the shifted frame; report it where the map lives
        record = self.derivative.to_dict()
        record["u_local"] = record["u"]
        record["u"] = (self.derivative.point + self.basepoint).tolist()
        return record

    def to_dict(self, norm: PolyhedralNorm) -> dict:
        b = self.basepoint
        return {
            "basepoint": b.tolist(),
            "fixed_points": [(p + b).tolist() for p in self.fixed_points],
            "locked": [s.to_dict(norm, b) for s in self.locked],
            "minimal_locked": [s.to_dict(norm, b) for s in self.minimal_locked],
            "minimality": "upper-approximation",
            "M": list(union_of_faces(self.minimal_locked).indices),
            "V": None if self.V is None else self.V.to_dict(),
            "derivative": None if self.derivative is None else self._derivative_dict(),
            "W": None if self.W is None else dict(self.W.to_dict(), offset=b.tolist()),
            "isometry_check": None if self.isometry_check is None else self.isometry_check.to_dict(),
            "projection_check": None if self.projection_check is None else self.projection_check.to_dict(),
            "value_preservation_defect": self.value_preservation,
            "locked_affine_defect": self.locked_affine_defect,
            "s_e_checks": [c.to_dict() for c in self.s_e_checks],
            "unseparated_pairs": self.unseparated_pairs,
            "coverage": None if self.coverage is None else self.coverage.to_dict(),
            "classes": self.classes,
            "linear_projection": None if self.linear_projection is None else self.linear_projection.tolist(),
            "linearization": None if self.linearization is None else self.linearization.to_dict(),
            "extension": None if self.extension is None else self.extension.to_dict(),
            "linear_order": self.order,
            "oracle": self.oracle,
            "failures": dict(self.failures),
        }


def _linear_projection(report: StructureReport, norm: PolyhedralNorm, tol: float) -> Optional[Matrix]:
    if norm.kind == "linf":
        report.classes = [list(c) for c in partition_support(report.V, tol)]
        return projection_linf(report.V, tol)
    if norm.kind == "l1":
        support = support_of_v(report.V, norm, tol)
        report.classes = [sorted(support)]
        return projection_l1(support, norm.ambient_dim)
    return None


def analyze_structure(
    f: MapSpec,
    norm: PolyhedralNorm,
    fixed_points: Sequence,
    action: Optional[MapSpec] = None,
    face_tol: float = DEFAULT_TOL,
    fp_tol: float = DEFAULT_FP_TOL,
    check_tol: float = DEFAULT_CHECK_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    retry_budget: int = DEFAULT_RETRY_BUDGET,
    samples: int = 200,
    seed: int = 0,
    h: float = DEFAULT_STEP,
    starts: Optional[int] = None,
    oracle: bool = False,
    oracle_box: float = 3.0,
) -> StructureReport:
    """Audit the structure of Fix(f) from sampled fixed points of f.

    ``action`` is the map linearized on W (f itself unless Fix(f) is the
    fixed set of an iterate). The first fixed point becomes the basepoint.
    Failed stages are recorded in ``failures`` and skip what depends on them.

    Args:
        f: The map under study
        norm: Its polyhedral norm
        fixed_points: Sampled fixed points; near-duplicates are dropped
        action: Map to linearize on W, when it differs from f
        oracle: Also enumerate minimal locked faces by brute force (n <= 3)

    Returns:
        StructureReport: every stage that ran, in the frame centred on the
        first fixed point
    """
    points = distinct_points(fixed_points, norm, POINT_SEPARATION)
    if not points:
        raise ValueError("analyze_structure needs at least one fixed point")
    basepoint = points[0]
    g = Conjugated(f, basepoint)
    local = [p - basepoint for p in points]
    report = StructureReport(basepoint, local)

    report.locked = find_locked_sets(g, norm, local, face_tol)
    report.minimal_locked = minimal_locked(report.locked)
    report.coverage = discovery_coverage(report.locked, starts or len(points), len(points))
    report.unseparated_pairs = separation_check(norm, local, union_of_faces(report.minimal_locked), face_tol)
    report.locked_affine_defect = locked_affine_check(
        g, norm, report.minimal_locked, min(samples, 50), seed, tol=face_tol
    )
    report.s_e_checks = [
        s_e_equality_check(g, norm, s, min(samples, 50), seed, tol=face_tol) for s in report.minimal_locked
    ]

    if oracle:
        report.oracle = _oracle(f, norm, report.minimal_locked, face_tol, fp_tol, max_iter, oracle_box)

    try:
        report.V = v_of_f(norm, report.minimal_locked, face_tol, local)
    except ContainmentViolationError as e:
        report.failures["v_of_f"] = str(e)
        return report

    try:
        report.derivative = derivative_of_retract(
            g, report.V, None, h, fp_tol, max_iter, check_tol, retry_budget, seed, norm=norm
        )
    except NoDifferentiablePointError as e:
        report.failures["derivative_of_retract"] = str(e)
        return report

    a = report.derivative.matrix
    report.W = image_of(a, report.V, check_tol)
    report.projection_check = verify_projection(a, norm, check_tol, report.V, seed=seed)
    report.isometry_check = verify_isometry(g, a, report.W, norm, samples, seed, fp_tol, max_iter)
    report.value_preservation = value_preservation_defect(
        g, a, report.V, norm, union_of_faces(report.minimal_locked), samples, seed, fp_tol, max_iter
    )

    try:
        report.linear_projection = _linear_projection(report, norm, face_tol)
    except StructureMismatchError as e:
        report.failures["linear_projection"] = str(e)

    inner = g if action is None else Conjugated(action, basepoint)
    try:
        report.linearization = linearize_on_fix(
            inner, a, report.W, min(samples, 50), seed, fp_tol, check_tol, g, norm, max_iter
        )
    except LinearityViolationError as e:
        report.failures["linearize_on_fix"] = str(e)
        return report
    report.order = linear_order(report.linearization.on_w, check_tol)
    if report.linear_projection is not None:
        report.extension = extend_linearization(
            report.linearization, a, report.linear_projection, norm, report.W
        )
    logger.info(
        f"Structure: {len(report.minimal_locked)} minimal locked faces, dim V = {report.V.dim}, "
        f"dim W = {report.W.dim}, linear order {report.order}"
    )
    return report


def _oracle(f, norm, minimal, tol, fp_tol, max_iter, box) -> Optional[dict]:
    if f.dim > ORACLE_MAX_DIM:
        logger.warning(f"Oracle skipped: n = {f.dim} exceeds {ORACLE_MAX_DIM}")
        return None
    grid = fixed_point_grid(f, norm, box=box, fp_tol=fp_tol, max_iter=max_iter)
    expected = oracle_minimal_locked_faces(f, norm, grid, tol)
    found = sorted((s.face for s in minimal), key=lambda e: e.key)
    return {
        "grid_points": len(grid),
        "faces": [list(e.indices) for e in expected],
        "match": set(expected) == set(found),
    }


def reduce_to_linear(
    f: MapSpec,
    norm: PolyhedralNorm,
    q: int,
    fixed_point: Vector,
    periodic_points: Sequence,
    **settings,
) -> StructureReport:
    """Analyze Fix(f^q) with f acting on it; ``fixed_point`` (of f) is the basepoint.

    The resulting linear order on W is informational: it is compared with q
    but only sampled orbits are behind q.
    """
    points = [np.asarray(fixed_point, dtype=float)] + [np.asarray(p, dtype=float) for p in periodic_points]
    return analyze_structure(Iterate(f, q), norm, points, action=f, **settings)
