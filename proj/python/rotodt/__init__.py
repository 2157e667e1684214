"""Diffraction tomography of rotating objects.

Volumes are numpy arrays of shape (N, N, N) indexed [j1 + N/2, j2 + N/2, j3 + N/2];
k-space points are (M, 3) float arrays and data values complex (M,) arrays.
"""

from ._core import (
    Design,
    Error,
    InvalidArgument,
    NoAnalyticIndicatrix,
    Phantom,
    Trajectory,
    Wave,
    add_noise,
    averaged_truth,
    design_summary,
    indicatrix,
    jacobian,
    kspace_points,
    ndft,
    ndft_adjoint,
    num_threads,
    psnr,
    rasterize,
    reconstruct,
    run_experiment,
    set_num_threads,
    ssim,
    synthesize,
)

__all__ = [
    "Design", "Error", "InvalidArgument", "NoAnalyticIndicatrix", "Phantom", "Trajectory",
    "Wave", "add_noise", "averaged_truth", "design_summary", "indicatrix", "jacobian",
    "kspace_points", "ndft", "ndft_adjoint", "num_threads", "psnr", "rasterize",
    "reconstruct", "run_experiment", "set_num_threads", "ssim", "synthesize",
]
