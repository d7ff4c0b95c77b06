"""Normal-image editing and bas-relief height-field generation.

Grids are numpy arrays indexed ``[row, col]`` (row = y = v, col = x = u):

* normal images  — ``(H, W, 3)`` float64, unit vectors, z > 0 by convention
* scalar fields  — ``(H, W)`` float64 (gray images, heights, base surfaces)
* vector fields  — ``(H, W, 2)`` float64 with ``(gx, gy)`` in the last axis
* masks          — ``(H, W)`` float64 weights in ``[0, 1]``
"""

from basrelief.normal_algebra import ominus, oplus, rotate, rotation_between
from basrelief.bandpass import (
    FilterParams,
    DetailTuning,
    bilateral_filter,
    compose,
    decompose,
    partial_smooth,
    transfer_detail,
    tune_detail,
)
from basrelief.image_to_normal import (
    GvfParams,
    SobelParams,
    canny_edges,
    grayscale,
    gvf_base_normal,
    gvf_field,
    normal_from_image,
)
from basrelief.relief_solver import (
    AuxSurface,
    SolverConfig,
    build_aux_surface,
    divergence,
    gradient_from_normals,
    rescale_height,
    solve_screened_poisson,
)

__version__ = "0.1.0"

__all__ = [
    "AuxSurface",
    "DetailTuning",
    "FilterParams",
    "GvfParams",
    "SobelParams",
    "SolverConfig",
    "bilateral_filter",
    "build_aux_surface",
    "canny_edges",
    "compose",
    "decompose",
    "divergence",
    "gradient_from_normals",
    "grayscale",
    "gvf_base_normal",
    "gvf_field",
    "normal_from_image",
    "ominus",
    "oplus",
    "partial_smooth",
    "rescale_height",
    "rotate",
    "rotation_between",
    "solve_screened_poisson",
    "transfer_detail",
    "tune_detail",
]
