"""
The linear isometry A ∘ f ∘ R on W and its nonexpansive extension to R^n.
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from dynamics.iteration import DEFAULT_FP_TOL, DEFAULT_MAX_ITER, krasnoselskii
from maps.base import MapSpec, apply
from maps.certify import operator_norm
from numerics.errors import LinearityViolationError
from numerics.linalg import Matrix, Subspace, as_matrix
from polynorm.norms import PolyhedralNorm, make_linf

logger = logging.getLogger(__name__)

DEFAULT_MAX_ORDER = 4096


@dataclass
class Linearization:
    """``on_w`` acts on W coordinates; ``matrix`` is the same map on R^n, zero off W."""

    on_w: Matrix
    matrix: Matrix
    superposition_residual: float

    def to_dict(self) -> dict:
        return {
            "on_W": self.on_w.tolist(),
            "matrix": self.matrix.tolist(),
            "superposition_residual": self.superposition_residual,
        }


def linearize_on_fix(
    f: MapSpec,
    matrix,
    w: Subspace,
    samples: int = 50,
    seed: int = 0,
    fp_tol: float = DEFAULT_FP_TOL,
    tol: float = 1e-7,
    retract_map: Optional[MapSpec] = None,
    norm: PolyhedralNorm = None,
    max_iter: int = DEFAULT_MAX_ITER,
    box: float = 1.0,
) -> Linearization:
    """Matrix of x -> A(f(R(x))) on a basis of W.

    R is the retract of ``retract_map`` (f^q when linearizing on Fix(f^q));
    it defaults to f. Superposition is audited on ``samples`` random pairs.
    """
    n = w.ambient_dim
    if w.dim == 0:
        return Linearization(np.zeros((0, 0)), np.zeros((n, n)), 0.0)
    a = as_matrix(matrix)
    norm = norm or make_linf(n)
    g = retract_map or f

    def step(x):
        return a @ apply(f, krasnoselskii(g, x, fp_tol, max_iter, norm).point)

    images = np.column_stack([step(w.basis[:, j]) for j in range(w.dim)])
    on_w = w.basis.T @ images
    full = w.basis @ on_w @ w.basis.T

    rng = np.random.default_rng(seed)
    residual = 0.0
    for _ in range(samples):
        x, y = rng.uniform(-box, box, size=(2, w.dim)) @ w.basis.T
        s, t = rng.uniform(-1.0, 1.0, size=2)
        residual = max(residual, float(np.abs(step(s * x + t * y) - s * step(x) - t * step(y)).max()))
    if residual > tol:
        raise LinearityViolationError(f"superposition residual {residual:.3e} exceeds {tol:g}")
    logger.info(f"Linearized on W (dim {w.dim}), superposition residual {residual:.3e}")
    return Linearization(on_w, full, residual)


@dataclass
class Extension:
    matrix: Matrix
    opnorm: float
    agreement_on_w: float

    def to_dict(self) -> dict:
        return {"matrix": self.matrix.tolist(), "opnorm": self.opnorm, "agreement_on_W": self.agreement_on_w}


def extend_linearization(
    linearization: Linearization,
    matrix,
    projection,
    norm: PolyhedralNorm,
    w: Subspace,
) -> Extension:
    """T = L A P: nonexpansive on R^n and equal to L on W."""
    t = linearization.matrix @ as_matrix(matrix) @ as_matrix(projection)
    agreement = 0.0
    if w.dim:
        agreement = float(np.abs(t @ w.basis - linearization.matrix @ w.basis).max())
    return Extension(t, operator_norm(t, norm), agreement)


def linear_order(on_w, tol: float = 1e-7, max_order: int = DEFAULT_MAX_ORDER) -> Optional[int]:
    """Smallest k >= 1 with L^k = I on W, or None within ``max_order``."""
    m = np.asarray(on_w, dtype=float)
    if m.size == 0:
        return 1
    identity = np.eye(m.shape[0])
    power = m.copy()
    for k in range(1, max_order + 1):
        if np.abs(power - identity).max() <= tol:
            return k
        power = power @ m
    return None
