"""
Locked sets, V(f), the derivative projection A, the subspace W and the
explicit ℓ1/ℓ∞ projections.
"""

from .analysis import StructureReport, analyze_structure, reduce_to_linear
from .convexity import affine_fix_audit
from .derivative import derivative_of_retract, verify_isometry, verify_projection
from .linearize import extend_linearization, linear_order, linearize_on_fix
from .locked import LockedSet, find_locked_sets, minimal_locked, s_e_member, v_of_f
from .projections import partition_support, projection_l1, projection_linf, support_of_v

__all__ = [
    "LockedSet",
    "StructureReport",
    "affine_fix_audit",
    "analyze_structure",
    "derivative_of_retract",
    "extend_linearization",
    "find_locked_sets",
    "linear_order",
    "linearize_on_fix",
    "minimal_locked",
    "partition_support",
    "projection_l1",
    "projection_linf",
    "reduce_to_linear",
    "s_e_member",
    "support_of_v",
    "v_of_f",
]
