"""
Nonexpansiveness certificates: exact operator norms where the norm allows
them, seeded random-pair sampling everywhere else.
"""

import concurrent.futures
import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from maps.base import MapSpec
from numerics.linalg import DEFAULT_TOL, Matrix, Vector, as_matrix
from polynorm.norms import PolyhedralNorm, norm_eval, norm_eval_many

logger = logging.getLogger(__name__)

PASS = "PASS"
FAIL = "FAIL"
EXACT = "exact-operator-norm"
SAMPLED = "sampled"
CHUNK_TRIALS = 256


def operator_norm_is_exact(norm: PolyhedralNorm) -> bool:
    return norm.kind in ("linf", "l1")


def operator_norm(matrix, norm: PolyhedralNorm, samples: int = 4000, seed: int = 0) -> float:
    """Induced norm of M: max row sum (ℓ∞), max column sum (ℓ1), else a sampled lower bound."""
    mat = as_matrix(matrix)
    if norm.kind == "linf":
        return float(np.abs(mat).sum(axis=1).max())
    if norm.kind == "l1":
        return float(np.abs(mat).sum(axis=0).max())
    rng = np.random.default_rng(seed)
    xs = rng.standard_normal((samples, mat.shape[1]))
    # the dual extremes are the directions that matter most for polyhedral norms
    xs = np.vstack([xs, norm.dual_extremes, np.eye(mat.shape[1])])
    denominators = norm_eval_many(norm, xs)
    keep = denominators > 0
    ratios = norm_eval_many(norm, xs[keep] @ mat.T) / denominators[keep]
    return float(ratios.max())


@dataclass
class LipschitzCertificate:
    """Outcome of a nonexpansiveness check."""

    method: str
    bound: float
    trials: int
    worst_pair: Optional[Tuple[Vector, Vector]] = None
    tol: float = DEFAULT_TOL

    @property
    def verdict(self) -> str:
        return PASS if self.bound <= 1.0 + self.tol else FAIL

    @property
    def passed(self) -> bool:
        return self.verdict == PASS

    def to_dict(self) -> dict:
        pair = None
        if self.worst_pair is not None:
            pair = [np.asarray(p).tolist() for p in self.worst_pair]
        return {
            "method": self.method,
            "bound": self.bound,
            "trials": self.trials,
            "worst_pair": pair,
            "verdict": self.verdict,
        }


def _sample_chunk(f: MapSpec, norm, trials, seed_seq, radius, centers):
    """Worst ratio ||f(x) - f(y)|| / ||x - y|| over one chunk of random pairs."""
    rng = np.random.default_rng(seed_seq)
    n = f.dim
    best = (-math.inf, None)
    for t in range(trials):
        center = centers[t % len(centers)]
        x = center + radius * rng.uniform(-1.0, 1.0, n)
        # log-uniform step sizes catch local expansion as well as global
        step = radius * 10.0 ** rng.uniform(-6.0, 0.0)
        direction = rng.standard_normal(n)
        y = x + step * direction / max(norm_eval(norm, direction), 1e-300)
        gap = norm_eval(norm, x - y)
        if gap == 0.0:
            continue
        ratio = norm_eval(norm, f.evaluate(x) - f.evaluate(y)) / gap
        if ratio > best[0]:
            best = (ratio, (x, y))
    return best


def sampled_lipschitz(
    f: MapSpec,
    norm: PolyhedralNorm,
    trials: int,
    seed: int,
    radius: float = 4.0,
    centers: Sequence = None,
    workers: int = 1,
) -> Tuple[float, Optional[Tuple[Vector, Vector]]]:
    """Largest sampled difference quotient, merged by deterministic max over chunks."""
    centers = [np.zeros(f.dim)] if not centers else [np.asarray(c, dtype=float) for c in centers]
    chunk_sizes = [CHUNK_TRIALS] * (trials // CHUNK_TRIALS)
    if trials % CHUNK_TRIALS:
        chunk_sizes.append(trials % CHUNK_TRIALS)
    seeds = np.random.SeedSequence(seed).spawn(len(chunk_sizes))

    with concurrent.futures.ThreadPoolExecutor(max_workers=max(1, workers)) as executor:
        results = list(
            executor.map(
                lambda args: _sample_chunk(f, norm, args[0], args[1], radius, centers),
                zip(chunk_sizes, seeds),
            )
        )

    best = (0.0, None)
    for ratio, pair in results:
        if ratio > best[0]:
            best = (ratio, pair)
    return best


def certify_nonexpansive(
    f: MapSpec,
    norm: PolyhedralNorm,
    trials: int = 2000,
    seed: int = 0,
    tol: float = DEFAULT_TOL,
    radius: float = 4.0,
    centers: Sequence = None,
    workers: int = 1,
) -> LipschitzCertificate:
    """Exact certificate when the variant admits one, sampled otherwise.

    Args:
        f: The map to certify
        norm: Norm on both domain and codomain
        trials: Random pairs drawn when no exact bound exists
        seed: Seed for the pair sampler
        tol: Slack on the bound before the verdict turns FAIL
        radius: Half-width of the sampling box around each center
        centers: Points the sampling box is centred on (default: the origin)
        workers: Threads sharing the trial chunks

    Returns:
        LipschitzCertificate: bound, method (EXACT or SAMPLED) and verdict
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    exact = f.exact_lipschitz(norm)
    if exact is not None:
        cert = LipschitzCertificate(EXACT, float(exact), 0, None, tol)
    else:
        bound, pair = sampled_lipschitz(f, norm, trials, seed, radius, centers, workers)
        cert = LipschitzCertificate(SAMPLED, float(bound), trials, pair, tol)
    logger.info(f"Certificate ({cert.method}): bound {cert.bound:.12g} -> {cert.verdict}")
    return cert
