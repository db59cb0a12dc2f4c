"""
Dense linear algebra and integer combinatorics shared by all polyfix packages.
"""

from .combinatorics import best_known_bound, landau, partitions_lcm_set
from .linalg import DEFAULT_TOL, Subspace, intersect, nullspace

__all__ = [
    "DEFAULT_TOL",
    "Subspace",
    "best_known_bound",
    "intersect",
    "landau",
    "nullspace",
    "partitions_lcm_set",
]
