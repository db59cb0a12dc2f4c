"""
Small dense linear algebra: subspaces, nullspaces and intersections.

Every subspace is stored through an orthonormal basis (columns of an
n x dim array). Ranks are decided with a relative singular-value cutoff:
values below ``tol * max(singular values)`` count as zero.
"""

from dataclasses import dataclass
from typing import Iterable

import numpy as np
import scipy.linalg

from numerics.errors import DimensionMismatchError

DEFAULT_TOL = 1e-9

Vector = np.ndarray
Matrix = np.ndarray


def as_vector(x, n: int = None) -> Vector:
    """Coerce ``x`` to a finite float vector, optionally of length ``n``."""
    vec = np.asarray(x, dtype=float).reshape(-1)
    if vec.size == 0:
        raise DimensionMismatchError("vectors must have at least one entry")
    if n is not None and vec.size != n:
        raise DimensionMismatchError(f"expected a vector of length {n}, got {vec.size}")
    if not np.all(np.isfinite(vec)):
        raise ValueError(f"vector has non-finite entries: {vec}")
    return vec


def as_matrix(m) -> Matrix:
    """Coerce ``m`` to a finite 2-d float array."""
    mat = np.atleast_2d(np.asarray(m, dtype=float))
    if mat.ndim != 2:
        raise DimensionMismatchError(f"expected a 2-d matrix, got shape {mat.shape}")
    if not np.all(np.isfinite(mat)):
        raise ValueError("matrix has non-finite entries")
    return mat


@dataclass(frozen=True, eq=False)
class Subspace:
    """A linear subspace of R^n spanned by the orthonormal columns of ``basis``."""

    basis: Matrix

    @property
    def ambient_dim(self) -> int:
        return self.basis.shape[0]

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @classmethod
    def zero(cls, n: int) -> "Subspace":
        return cls(np.zeros((n, 0)))

    @classmethod
    def full(cls, n: int) -> "Subspace":
        return cls(np.eye(n))

    @classmethod
    def span(cls, vectors: Iterable, n: int, tol: float = DEFAULT_TOL) -> "Subspace":
        """Orthonormal basis of the span of ``vectors`` (each of length n)."""
        cols = [as_vector(v, n) for v in vectors]
        if not cols:
            return cls.zero(n)
        stacked = np.column_stack(cols)
        if not np.any(stacked):
            return cls.zero(n)
        return cls(scipy.linalg.orth(stacked, rcond=tol))

    def project(self, x) -> Vector:
        """Orthogonal projection of ``x`` onto the subspace."""
        x = as_vector(x, self.ambient_dim)
        return self.basis @ (self.basis.T @ x)

    def coordinates(self, x) -> Vector:
        return self.basis.T @ as_vector(x, self.ambient_dim)

    def point(self, coords) -> Vector:
        return self.basis @ np.asarray(coords, dtype=float).reshape(self.dim)

    def contains(self, x, tol: float = DEFAULT_TOL) -> bool:
        x = as_vector(x, self.ambient_dim)
        residual = np.linalg.norm(x - self.project(x))
        return residual <= tol * max(1.0, np.linalg.norm(x))

    def contains_subspace(self, other: "Subspace", tol: float = DEFAULT_TOL) -> bool:
        return all(self.contains(other.basis[:, j], tol) for j in range(other.dim))

    def equals(self, other: "Subspace", tol: float = DEFAULT_TOL) -> bool:
        """Equality by mutual containment; bases are not canonical."""
        if self.ambient_dim != other.ambient_dim:
            return False
        return self.contains_subspace(other, tol) and other.contains_subspace(self, tol)

    def projector(self) -> Matrix:
        return self.basis @ self.basis.T

    def to_dict(self) -> dict:
        return {"dim": self.dim, "basis": self.basis.T.tolist()}


def nullspace(m, tol: float = DEFAULT_TOL) -> Subspace:
    """Basis for {x : Mx = 0} with the relative SVD cutoff ``tol``."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    mat = np.asarray(m, dtype=float)
    if mat.ndim == 1:
        mat = mat.reshape(1, -1)
    n = mat.shape[1]
    if mat.shape[0] == 0 or not np.any(mat):
        return Subspace.full(n)
    return Subspace(scipy.linalg.null_space(mat, rcond=tol))


def intersect(s1: Subspace, s2: Subspace, tol: float = DEFAULT_TOL) -> Subspace:
    """Basis of S1 ∩ S2, from the nullspace of [B1, -B2]."""
    if s1.ambient_dim != s2.ambient_dim:
        raise DimensionMismatchError(
            f"cannot intersect subspaces of R^{s1.ambient_dim} and R^{s2.ambient_dim}"
        )
    n = s1.ambient_dim
    if s1.dim == 0 or s2.dim == 0:
        return Subspace.zero(n)
    kernel = nullspace(np.hstack([s1.basis, -s2.basis]), tol)
    if kernel.dim == 0:
        return Subspace.zero(n)
    images = s1.basis @ kernel.basis[: s1.dim, :]
    return Subspace.span(images.T, n, tol)


def intersect_all(subspaces: Iterable[Subspace], n: int, tol: float = DEFAULT_TOL) -> Subspace:
    result = Subspace.full(n)
    for sub in subspaces:
        result = intersect(result, sub, tol)
    return result
