"""
Shared interface for nonexpansive map families.
"""

from abc import ABC, abstractmethod
from typing import Optional

from numerics.errors import DimensionMismatchError
from numerics.linalg import Vector, as_vector


class MapSpec(ABC):
    """A self-certifying map on R^n, evaluated pointwise."""

    dim: int

    @abstractmethod
    def evaluate(self, x: Vector) -> Vector:
        """Evaluate the map on a vector of length ``dim``."""

    @abstractmethod
    def exact_lipschitz(self, norm) -> Optional[float]:
        """An exact Lipschitz bound for ``norm``, or None when only sampling applies."""

    @abstractmethod
    def to_dict(self) -> dict:
        """Config-style record mirroring the variant fields."""

    def __call__(self, x) -> Vector:
        return apply(self, x)


def apply(f: MapSpec, x) -> Vector:
    """Evaluate ``f`` at ``x`` after checking the dimension."""
    x = as_vector(x)
    if x.size != f.dim:
        raise DimensionMismatchError(f"map acts on R^{f.dim}, got a vector of length {x.size}")
    return f.evaluate(x)
