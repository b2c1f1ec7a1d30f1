"""Spaces of submanifolds at desk scale: Gauss-image and volume distances, basic neighbourhoods, scanning."""

from .geometry import (
    INFINITY,
    ClosedSetSample,
    GaussPoint,
    GrassPlane,
    compactified_distance,
    gauss_distance,
    grassmann_distance,
    hausdorff_distance,
)
from .manifolds import (
    DiscretizedSubmanifold,
    LabeledSubmanifold,
    affine_plane,
    circle,
    empty,
    generate,
    graph_of_function,
    parallel_copies,
    perturb_normal,
    restrict_to_radius,
    rotate,
    sphere,
    torus,
)
from .metrics import fell_hausdorff, gr_w_distance, volume_function, volume_pseudodistance
from .neighborhoods import (
    NeighborhoodSpec,
    displacement,
    in_gs_neighborhood,
    in_ls_neighborhood,
    in_ms_neighborhood,
    in_ss_neighborhood,
    tubular_projection,
)
from .regions import Ball, Box, WholeSpace
from .scanning import scan_at, scan_metric, scan_section, section_distance
from .fileio import load, save, ingest_mesh

__all__ = [name for name in dir() if not name.startswith("_")]
