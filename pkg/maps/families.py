"""
Concrete real-analytic nonexpansive map families.

Affine maps, layered maps with 1-Lipschitz analytic activations, tensor maps
for the H-eigenproblem in log coordinates, and the combinators used by the
dynamics and structure packages (composition, averaging, conjugation by a
translation, iteration).
"""

import logging
from dataclasses import dataclass, field
from itertools import product
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import expit, logsumexp

from maps.base import MapSpec
from maps.certify import operator_norm, operator_norm_is_exact
from numerics.errors import ConfigError, DimensionMismatchError, SingularNormalizationError
from numerics.linalg import Matrix, Vector, as_matrix, as_vector

logger = logging.getLogger(__name__)


def _scaled_sigmoid(x):
    # 4 * sigmoid(x) - 2 has Lipschitz constant exactly 1
    return 4.0 * expit(x) - 2.0


ACTIVATIONS = {
    "identity": lambda x: x,
    "sin": np.sin,
    "tanh": np.tanh,
    "sigmoid": _scaled_sigmoid,
}


def _exact_operator_norm(matrix: Matrix, norm) -> Optional[float]:
    if not operator_norm_is_exact(norm):
        return None
    return operator_norm(matrix, norm)


@dataclass(eq=False)
class Affine(MapSpec):
    """f(x) = M x + b."""

    matrix: Matrix
    offset: Vector = None

    def __post_init__(self):
        self.matrix = as_matrix(self.matrix)
        rows, cols = self.matrix.shape
        if rows != cols:
            raise DimensionMismatchError(f"affine maps need a square matrix, got {rows}x{cols}")
        self.dim = cols
        self.offset = np.zeros(cols) if self.offset is None else as_vector(self.offset, cols)

    def evaluate(self, x: Vector) -> Vector:
        return self.matrix @ x + self.offset

    def exact_lipschitz(self, norm) -> Optional[float]:
        return _exact_operator_norm(self.matrix, norm)

    def to_dict(self) -> dict:
        return {"kind": "affine", "matrix": self.matrix.tolist(), "offset": self.offset.tolist()}


def signed_permutation(permutation: Sequence[int], signs: Sequence[float] = None) -> Affine:
    """The linear map x -> S P x sending coordinate i to position permutation[i]."""
    n = len(permutation)
    if sorted(permutation) != list(range(n)):
        raise ConfigError(f"{list(permutation)} is not a permutation of 0..{n - 1}")
    signs = np.ones(n) if signs is None else as_vector(signs, n)
    if not np.all(np.isin(signs, (-1.0, 1.0))):
        raise ConfigError("signed permutation signs must be +1 or -1")
    matrix = np.zeros((n, n))
    for i, target in enumerate(permutation):
        matrix[target, i] = signs[target]
    return Affine(matrix)


def scaled_identity(n: int, scale: float) -> Affine:
    return Affine(scale * np.eye(n))


@dataclass(eq=False)
class Layer:
    """x -> activation(W x + b); activation is one name or one name per output."""

    weights: Matrix
    bias: Vector = None
    activation: Union[str, Tuple[str, ...]] = "identity"

    def __post_init__(self):
        self.weights = as_matrix(self.weights)
        rows = self.weights.shape[0]
        self.bias = np.zeros(rows) if self.bias is None else as_vector(self.bias, rows)
        names = (self.activation,) * rows if isinstance(self.activation, str) else tuple(self.activation)
        if len(names) != rows:
            raise ConfigError(f"layer has {rows} outputs but {len(names)} activations")
        unknown = [name for name in names if name not in ACTIVATIONS]
        if unknown:
            raise ConfigError(f"unknown activations {unknown}; expected {sorted(ACTIVATIONS)}")
        self.activation = names if len(set(names)) > 1 else names[0]
        self._names = names

    @property
    def in_dim(self) -> int:
        return self.weights.shape[1]

    @property
    def out_dim(self) -> int:
        return self.weights.shape[0]

    def evaluate(self, x: Vector) -> Vector:
        pre = self.weights @ x + self.bias
        if isinstance(self.activation, str):
            return ACTIVATIONS[self.activation](pre)
        return np.array([ACTIVATIONS[name](v) for name, v in zip(self._names, pre)])

    def to_dict(self) -> dict:
        activation = self.activation if isinstance(self.activation, str) else list(self.activation)
        return {"weights": self.weights.tolist(), "bias": self.bias.tolist(), "activation": activation}


@dataclass(eq=False)
class AnalyticLayers(MapSpec):
    """Composition of layers; the first layer is applied first."""

    layers: Tuple[Layer, ...]

    def __post_init__(self):
        self.layers = tuple(self.layers)
        if not self.layers:
            raise ConfigError("a layered map needs at least one layer")
        self.dim = self.layers[0].in_dim
        width = self.dim
        for i, layer in enumerate(self.layers):
            if layer.in_dim != width:
                raise DimensionMismatchError(
                    f"layer {i} expects inputs of length {layer.in_dim}, previous width is {width}"
                )
            width = layer.out_dim
        if width != self.dim:
            raise DimensionMismatchError(f"layered map ends in R^{width}, must return to R^{self.dim}")

    def evaluate(self, x: Vector) -> Vector:
        for layer in self.layers:
            x = layer.evaluate(x)
        return x

    def exact_lipschitz(self, norm) -> Optional[float]:
        # entrywise 1-Lipschitz activations are nonexpansive for the coordinate
        # norms only, so custom norms fall back to sampling
        if norm.kind not in ("linf", "l1"):
            return None
        bound = 1.0
        for layer in self.layers:
            if layer.out_dim != layer.in_dim:
                return None
            bound *= _exact_operator_norm(layer.weights, norm)
        return bound

    def to_dict(self) -> dict:
        return {"kind": "layers", "layers": [layer.to_dict() for layer in self.layers]}


def h_eigenpair(coefficients, tol: float = 1e-13, max_iter: int = 10000) -> Tuple[float, Vector]:
    """Positive H-eigenpair (mu, x) of T(x)_i = (sum A_{i j..} x_j ...)^(1/(m-1)).

    Normalized power iteration; mu is bracketed by the Collatz-Wielandt ratios
    min_i T(x)_i / x_i <= mu <= max_i T(x)_i / x_i.
    """
    tensor = np.asarray(coefficients, dtype=float)
    order = tensor.ndim
    n = tensor.shape[0]
    x = np.full(n, 1.0 / n)
    low, high = 0.0, np.inf
    for it in range(max_iter):
        tx = _tensor_apply(tensor, x) ** (1.0 / (order - 1))
        ratios = tx / x
        low, high = float(ratios.min()), float(ratios.max())
        if high - low <= tol * high:
            logger.debug(f"H-eigenpair converged after {it + 1} iterations, mu={high:.12g}")
            break
        x = 0.5 * (x + tx / tx.sum())
    else:
        logger.warning(f"H-eigenpair not converged: ratio bracket [{low:.6g}, {high:.6g}]")
    return 0.5 * (low + high), x / x.sum()


def _tensor_apply(tensor: np.ndarray, x: Vector) -> Vector:
    out = tensor
    for _ in range(tensor.ndim - 1):
        out = out @ x
    return out


@dataclass(eq=False)
class TensorH(MapSpec):
    """The H-eigenproblem map of a nonnegative tensor in log coordinates.

    With T(x)_i = (sum_{j2..jm} A_{i j2..jm} x_{j2} ... x_{jm})^(1/(m-1)) and
    x = exp(y), this is F(y) = log T(exp y) - shift. F is monotone and
    additively homogeneous, hence ∞-norm nonexpansive; with shift = log mu for
    the H-eigenvalue mu its fixed points are log of the positive eigenvectors.
    """

    coefficients: np.ndarray
    shift: float = 0.0
    declared_bound: Optional[float] = None
    _exponents: np.ndarray = field(init=False, repr=False)
    _weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        tensor = np.asarray(self.coefficients, dtype=float)
        if tensor.ndim < 2 or len(set(tensor.shape)) != 1:
            raise ConfigError(f"tensor coefficients must be an n x ... x n array, got {tensor.shape}")
        if np.any(tensor < 0) or not np.all(np.isfinite(tensor)):
            raise ConfigError("tensor coefficients must be finite and nonnegative")
        self.coefficients = tensor
        self.dim = tensor.shape[0]
        self.order = tensor.ndim
        tails = list(product(range(self.dim), repeat=self.order - 1))
        self._exponents = np.zeros((len(tails), self.dim))
        for row, tail in enumerate(tails):
            for j in tail:
                self._exponents[row, j] += 1.0
        self._weights = tensor.reshape(self.dim, -1)

    @classmethod
    def normalized(cls, coefficients, declared_bound: Optional[float] = None) -> "TensorH":
        mu, _ = h_eigenpair(coefficients)
        return cls(coefficients, shift=float(np.log(mu)), declared_bound=declared_bound)

    def evaluate(self, y: Vector) -> Vector:
        exponents = self._exponents @ y
        with np.errstate(divide="ignore"):
            values = logsumexp(np.broadcast_to(exponents, self._weights.shape), b=self._weights, axis=1)
        if not np.all(np.isfinite(values)):
            bad = np.flatnonzero(~np.isfinite(values)).tolist()
            raise SingularNormalizationError(
                f"tensor map undefined at {y.tolist()}: rows {bad} have no positive mass"
            )
        return values / (self.order - 1) - self.shift

    def exact_lipschitz(self, norm) -> Optional[float]:
        return self.declared_bound

    def to_dict(self) -> dict:
        record = {"kind": "tensor_h", "coefficients": self.coefficients.tolist(), "shift": self.shift}
        if self.declared_bound is not None:
            record["declared_bound"] = self.declared_bound
        return record


@dataclass(eq=False)
class Composite(MapSpec):
    """maps[-1] o ... o maps[0]."""

    maps: Tuple[MapSpec, ...]

    def __post_init__(self):
        self.maps = tuple(self.maps)
        if not self.maps:
            raise ConfigError("a composite map needs at least one component")
        dims = {m.dim for m in self.maps}
        if len(dims) != 1:
            raise DimensionMismatchError(f"composite components act on different spaces: {sorted(dims)}")
        self.dim = dims.pop()

    def evaluate(self, x: Vector) -> Vector:
        for m in self.maps:
            x = m.evaluate(x)
        return x

    def exact_lipschitz(self, norm) -> Optional[float]:
        bound = 1.0
        for m in self.maps:
            part = m.exact_lipschitz(norm)
            if part is None:
                return None
            bound *= part
        return bound

    def to_dict(self) -> dict:
        return {"kind": "composite", "maps": [m.to_dict() for m in self.maps]}


@dataclass(eq=False)
class Averaged(MapSpec):
    """(1 - weight) x + weight f(x); weight 1/2 is the Krasnoselskii operator."""

    inner: MapSpec
    weight: float = 0.5

    def __post_init__(self):
        if not 0.0 < self.weight <= 1.0:
            raise ConfigError(f"averaging weight must lie in (0, 1], got {self.weight}")
        self.dim = self.inner.dim

    def evaluate(self, x: Vector) -> Vector:
        return (1.0 - self.weight) * x + self.weight * self.inner.evaluate(x)

    def exact_lipschitz(self, norm) -> Optional[float]:
        inner = self.inner.exact_lipschitz(norm)
        return None if inner is None else (1.0 - self.weight) + self.weight * inner

    def to_dict(self) -> dict:
        return {"kind": "averaged", "map": self.inner.to_dict(), "weight": self.weight}


@dataclass(eq=False)
class Conjugated(MapSpec):
    """x -> f(x + basepoint) - basepoint, moving a fixed point to the origin."""

    inner: MapSpec
    basepoint: Vector

    def __post_init__(self):
        self.dim = self.inner.dim
        self.basepoint = as_vector(self.basepoint, self.dim)

    def evaluate(self, x: Vector) -> Vector:
        return self.inner.evaluate(x + self.basepoint) - self.basepoint

    def exact_lipschitz(self, norm) -> Optional[float]:
        return self.inner.exact_lipschitz(norm)

    def to_dict(self) -> dict:
        return {"kind": "conjugated", "map": self.inner.to_dict(), "basepoint": self.basepoint.tolist()}


@dataclass(eq=False)
class Iterate(MapSpec):
    """f^power, evaluated by repeated application."""

    inner: MapSpec
    power: int

    def __post_init__(self):
        if self.power < 1:
            raise ValueError(f"iterate power must be at least 1, got {self.power}")
        self.dim = self.inner.dim

    def evaluate(self, x: Vector) -> Vector:
        for _ in range(self.power):
            x = self.inner.evaluate(x)
        return x

    def exact_lipschitz(self, norm) -> Optional[float]:
        inner = self.inner.exact_lipschitz(norm)
        return None if inner is None else inner**self.power

    def to_dict(self) -> dict:
        return {"kind": "iterate", "map": self.inner.to_dict(), "power": self.power}
