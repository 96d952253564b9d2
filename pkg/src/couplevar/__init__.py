"""Coupling-model denoising, segmentation, and edge detection toolkit."""

from .edges import EdgeMap, canny, canny_strength, detect_edges, edge_map, hysteresis
from .energy import (
    ModelParams,
    coupling_magnitude,
    diffusivity,
    energy_gradient,
    face_diffusivities,
    smoothness,
    total_energy,
)
from .grid import (
    StaggeredField,
    divergence,
    dot,
    grad_forward,
    laplacian_u,
    laplacian_v,
)
from .imaging import (
    FormatError,
    add_gaussian_noise,
    mse,
    psnr,
    read_fgrid,
    read_image,
    synth_affine,
    write_fgrid,
    write_image,
)
from .solver_altmin import cg_solve, solve_altmin
from .solver_bregman import (
    BregmanState,
    ConvergenceTrace,
    SolveResult,
    SolverConfig,
    solve,
    tikhonov_denoise,
)

__version__ = "0.1.0"

__all__ = [
    "BregmanState",
    "ConvergenceTrace",
    "EdgeMap",
    "FormatError",
    "ModelParams",
    "SolveResult",
    "SolverConfig",
    "StaggeredField",
    "add_gaussian_noise",
    "canny",
    "canny_strength",
    "cg_solve",
    "coupling_magnitude",
    "detect_edges",
    "diffusivity",
    "divergence",
    "dot",
    "edge_map",
    "energy_gradient",
    "face_diffusivities",
    "grad_forward",
    "hysteresis",
    "laplacian_u",
    "laplacian_v",
    "mse",
    "psnr",
    "read_fgrid",
    "read_image",
    "smoothness",
    "solve",
    "solve_altmin",
    "synth_affine",
    "tikhonov_denoise",
    "total_energy",
    "write_fgrid",
    "write_image",
]
