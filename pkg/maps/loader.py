"""
Build map families from config records.
"""

from maps.base import MapSpec
from maps.families import (
    AnalyticLayers,
    Averaged,
    Composite,
    Affine,
    Layer,
    TensorH,
    scaled_identity,
    signed_permutation,
)
from numerics.errors import ConfigError, PolyfixError


def map_from_dict(record: dict, n: int = None) -> MapSpec:
    """Build a MapSpec from {"kind": ..., <variant fields>}; checks the dimension when given."""
    if not isinstance(record, dict):
        raise ConfigError(f"map spec must be a mapping, got {type(record).__name__}")
    kind = record.get("kind")
    try:
        f = _BUILDERS[kind](record, n)
    except KeyError as e:
        if kind not in _BUILDERS:
            raise ConfigError(f"unknown map kind {kind!r}; expected one of {sorted(_BUILDERS)}")
        raise ConfigError(f"{kind} map is missing field {e}")
    except ConfigError:
        raise
    except (PolyfixError, ValueError, TypeError) as e:
        raise ConfigError(f"invalid {kind} map: {e}")
    if n is not None and f.dim != n:
        raise ConfigError(f"{kind} map acts on R^{f.dim} but the norm lives on R^{n}")
    return f


def _affine(record, n):
    return Affine(record["matrix"], record.get("offset"))


def _signed_permutation(record, n):
    return signed_permutation(record["permutation"], record.get("signs"))


def _scaled_identity(record, n):
    return scaled_identity(int(record.get("n", n)), float(record["scale"]))


def _layers(record, n):
    layers = [
        Layer(layer["weights"], layer.get("bias"), layer.get("activation", "identity"))
        for layer in record["layers"]
    ]
    return AnalyticLayers(layers)


def _tensor_h(record, n):
    bound = record.get("declared_bound")
    bound = None if bound is None else float(bound)
    shift = record.get("shift", 0.0)
    if shift == "auto":
        return TensorH.normalized(record["coefficients"], declared_bound=bound)
    return TensorH(record["coefficients"], shift=float(shift), declared_bound=bound)


def _averaged(record, n):
    return Averaged(map_from_dict(record["map"], n), float(record.get("weight", 0.5)))


def _composite(record, n):
    return Composite([map_from_dict(part, n) for part in record["maps"]])


_BUILDERS = {
    "affine": _affine,
    "signed_permutation": _signed_permutation,
    "scaled_identity": _scaled_identity,
    "layers": _layers,
    "tensor_h": _tensor_h,
    "averaged": _averaged,
    "composite": _composite,
}
