"""
Explicit nonexpansive projections onto V for the ℓ∞ and ℓ1 norms.

Coordinates are 0-based throughout.
"""

import logging
from typing import Iterable, List, Set, Tuple

import numpy as np

from numerics.errors import DimensionMismatchError, StructureMismatchError
from numerics.linalg import DEFAULT_TOL, Matrix, Subspace
from polynorm.norms import PolyhedralNorm

logger = logging.getLogger(__name__)


def partition_support(v: Subspace, tol: float = DEFAULT_TOL) -> List[Tuple[int, ...]]:
    """Classes of i ~ j iff |x_i| = |x_j| for every x in V.

    With x = B c, the relation holds exactly when rows B_i and B_j agree up
    to sign. Coordinates vanishing on V form one class.
    """
    rows = v.basis
    classes: List[List[int]] = []
    for i in range(v.ambient_dim):
        for cls in classes:
            j = cls[0]
            if min(np.linalg.norm(rows[i] - rows[j]), np.linalg.norm(rows[i] + rows[j])) <= tol:
                cls.append(i)
                break
        else:
            classes.append([i])
    return sorted(tuple(c) for c in classes)


def _sign_pattern(v: Subspace, cls: Tuple[int, ...], tol: float) -> np.ndarray:
    """v_I: the restriction to I of a point of V with |x_i| = 1 on I, or 0."""
    pattern = np.zeros(v.ambient_dim)
    lead = v.basis[cls[0]]
    scale = float(lead @ lead)
    if scale <= tol**2:
        return pattern
    x = v.basis @ (lead / scale)
    for i in cls:
        if abs(abs(x[i]) - 1.0) > 1e3 * tol:
            raise StructureMismatchError(
                f"class {list(cls)} has no point of V with unit modulus (|x_{i}| = {abs(x[i]):.6g})"
            )
        pattern[i] = np.sign(x[i])
    return pattern


def projection_linf(v: Subspace, tol: float = DEFAULT_TOL) -> Matrix:
    """P = sum_k v_k v_k^T / |I_k| over the classes of partition_support.

    Raises StructureMismatchError unless P is an ℓ∞-nonexpansive projection
    with image exactly V.
    """
    n = v.ambient_dim
    p = np.zeros((n, n))
    for cls in partition_support(v, tol):
        pattern = _sign_pattern(v, cls, tol)
        if not pattern.any():
            continue
        if not v.contains(pattern, max(tol, 1e-9)):
            raise StructureMismatchError(f"sign pattern {pattern.tolist()} of class {list(cls)} is not in V")
        p += np.outer(pattern, pattern) / len(cls)

    checks = {
        "P^2 - P": float(np.abs(p @ p - p).max()) if n else 0.0,
        "P restricted to V": float(np.abs(p @ v.basis - v.basis).max()) if v.dim else 0.0,
        "row sum excess": max(0.0, float(np.abs(p).sum(axis=1).max()) - 1.0) if n else 0.0,
    }
    failed = {k: d for k, d in checks.items() if d > max(tol, 1e-12)}
    if failed:
        raise StructureMismatchError(f"ℓ∞ projection checks failed: {failed}")
    return p


def projection_l1(support: Iterable[int], n: int) -> Matrix:
    """Coordinate projection onto the support (0-based indices)."""
    support = set(support)
    if any(i < 0 or i >= n for i in support):
        raise ValueError(f"support {sorted(support)} is not a subset of 0..{n - 1}")
    return np.diag([1.0 if i in support else 0.0 for i in range(n)])


def support_of_v(v: Subspace, norm: PolyhedralNorm, tol: float = DEFAULT_TOL) -> Set[int]:
    """The coordinates not identically zero on V; V must be their coordinate subspace."""
    if norm.ambient_dim != v.ambient_dim:
        raise DimensionMismatchError(f"V lives in R^{v.ambient_dim}, the norm on R^{norm.ambient_dim}")
    support = {i for i in range(v.ambient_dim) if np.linalg.norm(v.basis[i]) > tol}
    if len(support) != v.dim:
        raise StructureMismatchError(
            f"V (dim {v.dim}) is not the coordinate subspace on {sorted(support)}"
        )
    return support
