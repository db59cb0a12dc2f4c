"""
Polyhedral norms described by the extreme points of their dual unit ball.

For such a norm ``||x|| = max_phi phi(x)`` over the finitely many dual
extremes, so every evaluation is a single matrix-vector product.
"""

import itertools
import logging
from dataclasses import dataclass

import numpy as np
import scipy.optimize

from numerics.errors import ConfigError, DimensionMismatchError, OutOfRangeError
from numerics.linalg import DEFAULT_TOL, Matrix, Vector, as_matrix, as_vector

logger = logging.getLogger(__name__)

MAX_L1_DIM = 16
KINDS = ("linf", "l1", "custom")


@dataclass(frozen=True, eq=False)
class PolyhedralNorm:
    """A norm on R^n given by the rows of ``dual_extremes`` (ext B_{X*})."""

    dual_extremes: Matrix
    kind: str = "custom"

    @property
    def ambient_dim(self) -> int:
        return self.dual_extremes.shape[1]

    @property
    def size(self) -> int:
        return self.dual_extremes.shape[0]

    @property
    def p_norm(self):
        """1 or "inf" for the coordinate norms, None for custom norms."""
        return {"linf": "inf", "l1": 1}.get(self.kind)

    def label(self, index: int) -> str:
        phi = self.dual_extremes[index]
        if self.kind == "linf":
            axis = int(np.argmax(np.abs(phi)))
            return f"{'+' if phi[axis] > 0 else '-'}e{axis + 1}"
        if self.kind == "l1":
            return "(" + ",".join("+" if s > 0 else "-" for s in phi) + ")"
        return f"phi{index}"

    def __call__(self, x) -> float:
        return norm_eval(self, x)

    def to_dict(self) -> dict:
        record = {"kind": self.kind, "n": self.ambient_dim}
        if self.kind == "custom":
            record["dual_extremes"] = self.dual_extremes.tolist()
        return record


def make_linf(n: int) -> PolyhedralNorm:
    """The ∞-norm: dual extremes +e_1..+e_n followed by -e_1..-e_n."""
    if n < 1:
        raise OutOfRangeError(f"n must be at least 1, got {n}")
    eye = np.eye(n)
    return PolyhedralNorm(np.vstack([eye, -eye]), kind="linf")


def make_l1(n: int) -> PolyhedralNorm:
    """The 1-norm: dual extremes are all 2^n sign vectors."""
    if not 1 <= n <= MAX_L1_DIM:
        raise OutOfRangeError(f"make_l1 supports 1 <= n <= {MAX_L1_DIM}, got {n}")
    signs = np.array(list(itertools.product((1.0, -1.0), repeat=n)))
    return PolyhedralNorm(signs, kind="l1")


def make_custom(dual_extremes, tol: float = DEFAULT_TOL) -> PolyhedralNorm:
    """Build a custom norm, checking symmetry, spanning and extremality."""
    extremes = as_matrix(dual_extremes)
    k, n = extremes.shape

    for i in range(k):
        if not np.any(np.abs(extremes + extremes[i]).max(axis=1) <= tol):
            raise ConfigError(f"dual extremes are not symmetric: -{extremes[i]} missing")

    if np.linalg.matrix_rank(extremes, tol=tol) < n:
        raise ConfigError("dual extremes do not span R^n; the norm would be degenerate")

    for i in range(k):
        if _in_convex_hull(extremes[i], np.delete(extremes, i, axis=0)):
            raise ConfigError(f"dual extreme {extremes[i]} lies in the hull of the others")

    return PolyhedralNorm(extremes, kind="custom")


def _in_convex_hull(point: Vector, others: Matrix) -> bool:
    """LP feasibility: lambda >= 0, sum lambda = 1, others^T lambda = point."""
    m = others.shape[0]
    a_eq = np.vstack([others.T, np.ones((1, m))])
    b_eq = np.append(point, 1.0)
    result = scipy.optimize.linprog(
        np.zeros(m), A_eq=a_eq, b_eq=b_eq, bounds=[(0, None)] * m, method="highs"
    )
    return result.status == 0


def norm_eval(norm: PolyhedralNorm, x) -> float:
    """||x|| = max over dual extremes of phi(x)."""
    x = as_vector(x)
    if x.size != norm.ambient_dim:
        raise DimensionMismatchError(
            f"vector of length {x.size} does not match norm on R^{norm.ambient_dim}"
        )
    return float(max(0.0, np.max(norm.dual_extremes @ x)))


def norm_eval_many(norm: PolyhedralNorm, xs) -> Vector:
    """Row-wise norms of a (m, n) array."""
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    if xs.shape[1] != norm.ambient_dim:
        raise DimensionMismatchError(
            f"rows of length {xs.shape[1]} do not match norm on R^{norm.ambient_dim}"
        )
    return np.maximum(0.0, (xs @ norm.dual_extremes.T).max(axis=1))


def norm_from_dict(record: dict) -> PolyhedralNorm:
    """Build a norm from a config record {"kind", "n", "dual_extremes"}."""
    if not isinstance(record, dict):
        raise ConfigError(f"norm spec must be a mapping, got {type(record).__name__}")
    kind = record.get("kind")
    if kind not in KINDS:
        raise ConfigError(f"unknown norm kind {kind!r}; expected one of {KINDS}")
    if kind == "custom":
        if "dual_extremes" not in record:
            raise ConfigError("custom norm requires 'dual_extremes'")
        norm = make_custom(record["dual_extremes"])
        if "n" in record and int(record["n"]) != norm.ambient_dim:
            raise ConfigError(
                f"custom norm declares n={record['n']} but extremes live in R^{norm.ambient_dim}"
            )
        return norm
    if "n" not in record:
        raise ConfigError(f"{kind} norm requires 'n'")
    n = int(record["n"])
    return make_linf(n) if kind == "linf" else make_l1(n)
