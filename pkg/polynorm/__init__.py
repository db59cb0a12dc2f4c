"""
Polyhedral norms, duality maps and the face geometry of their unit balls.
"""

from .duality import (
    DualFace,
    FaceSample,
    duality_map,
    enumerate_faces,
    face_of_ball,
    l_e_subspace,
    stability_radius,
)
from .norms import (
    PolyhedralNorm,
    make_custom,
    make_l1,
    make_linf,
    norm_eval,
    norm_eval_many,
    norm_from_dict,
)

__all__ = [
    "DualFace",
    "FaceSample",
    "PolyhedralNorm",
    "duality_map",
    "enumerate_faces",
    "face_of_ball",
    "l_e_subspace",
    "make_custom",
    "make_l1",
    "make_linf",
    "norm_eval",
    "norm_eval_many",
    "norm_from_dict",
    "stability_radius",
]
