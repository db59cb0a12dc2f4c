"""
Cross-check for strictly convex norms, where Fix(f) is an affine subspace.
"""

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from maps.base import MapSpec, apply


@dataclass
class AffineAudit:
    pairs: int
    max_defect: float

    def to_dict(self) -> dict:
        return {"pairs": self.pairs, "max_defect": self.max_defect}


def affine_fix_audit(
    f: MapSpec,
    strictly_convex: bool,
    fixed_points: Sequence,
    samples: int = 100,
    seed: int = 0,
) -> AffineAudit:
    """Largest Euclidean residual ||f(z) - z|| at z = (1 - t) x + t y, t in [-2, 3]."""
    if not strictly_convex:
        raise ValueError("affine_fix_audit requires a strictly convex ambient norm")
    points = [np.asarray(p, dtype=float) for p in fixed_points]
    pairs = list(itertools.combinations(range(len(points)), 2))
    if not pairs:
        return AffineAudit(0, 0.0)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        i, j = pairs[rng.integers(len(pairs))]
        t = rng.uniform(-2.0, 3.0)
        z = (1.0 - t) * points[i] + t * points[j]
        worst = max(worst, float(np.linalg.norm(apply(f, z) - z)))
    return AffineAudit(len(pairs), worst)
