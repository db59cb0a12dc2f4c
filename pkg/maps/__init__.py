"""
Real-analytic nonexpansive map families and their certificates.
"""

from .base import MapSpec, apply
from .certify import LipschitzCertificate, certify_nonexpansive, operator_norm
from .families import (
    Affine,
    AnalyticLayers,
    Averaged,
    Composite,
    Conjugated,
    Iterate,
    Layer,
    TensorH,
    h_eigenpair,
    scaled_identity,
    signed_permutation,
)
from .loader import map_from_dict

__all__ = [
    "Affine",
    "AnalyticLayers",
    "Averaged",
    "Composite",
    "Conjugated",
    "Iterate",
    "Layer",
    "LipschitzCertificate",
    "MapSpec",
    "TensorH",
    "apply",
    "certify_nonexpansive",
    "h_eigenpair",
    "map_from_dict",
    "operator_norm",
    "scaled_identity",
    "signed_permutation",
]
