"""Desk-scale simulation laboratory for the scaled corner growth landscape.

Layers, bottom to top:

- ``grids``, ``rng``, ``sampling``: uniform grids, counter-based seeded
  streams, Brownian path and bridge samplers.
- ``lpp``: semi-discrete last passage percolation over line ensembles,
  geodesics, the melon transform, reflected ensembles.
- ``airy``: edge-rescaled ensembles, two-parameter sheet samples, and the
  semi-infinite machinery (boundary data, geodesic jump times).
- ``kpz``: variational evolution of initial data, records, coalescence,
  rectangle diagnostics.
- ``capacity``: kernels, energies, capped capacity, parabolic dimension,
  hitting Monte Carlo, image geometry.
- ``stats``, ``acceptance``: test statistics and the named end-to-end
  checks; ``cli`` exposes everything as a command line tool.
"""

from .acceptance import build_checks, run_acceptance
from .airy import (
    AiryEnsembleApprox,
    SemiInfiniteAnchor,
    SheetSample,
    airy_coord,
    airy_time,
    boundary_data,
    coupling_residual,
    geodesic_jump_time,
    rescale_sheet,
    reversed_environment,
    sample_airy_ensemble,
    sample_airy_sheet,
    sample_driving,
    stationary_view,
)
from .capacity import (
    CapacityReport,
    CompactSetSpec,
    GridMeasure,
    HittingReport,
    ImageReport,
    bessel_riesz_energy,
    capacity,
    dilate,
    hitting_mc,
    image_geometry,
    parabolic_dim,
    projected_gradient_capacity,
    thermal_energy,
)
from .errors import (
    AlignmentError,
    DomainError,
    EmptySupportError,
    FinitaryError,
    GridMismatchError,
    InfeasibleRegionError,
    LabError,
    WindowTooSmallError,
)
from .grids import Grid, GridFunction, linspace_grid, same_grid
from .kpz import (
    Flat,
    NarrowWedges,
    Parametric,
    QuadrangleCDF,
    RecordSet,
    Sampled,
    coalescence_tau,
    delta_m,
    evolve,
    evolve_coupled,
    make_initial,
    quadrangle_cdf,
    record_times,
    validate_finitary,
)
from .lpp import (
    BoundaryData,
    JumpPath,
    LineEnsembleGrid,
    lpp,
    melon,
    melon_top,
    path_length,
    pitman,
    reflect_with_boundary,
    rightmost_geodesic,
)
from .rng import RngStream
from .sampling import decompose_bridge, resample_nonintersecting, sample_bm, sample_bridge
from .stats import (
    Sample,
    TestReport,
    gue_lmax,
    ks_one_sample,
    ks_two_sample,
    run_suite,
    wilson_ci,
)

__version__ = "0.1.0"

__all__ = [
    "AiryEnsembleApprox",
    "AlignmentError",
    "BoundaryData",
    "CapacityReport",
    "CompactSetSpec",
    "DomainError",
    "EmptySupportError",
    "FinitaryError",
    "Flat",
    "Grid",
    "GridFunction",
    "GridMeasure",
    "GridMismatchError",
    "HittingReport",
    "ImageReport",
    "InfeasibleRegionError",
    "JumpPath",
    "LabError",
    "LineEnsembleGrid",
    "NarrowWedges",
    "Parametric",
    "QuadrangleCDF",
    "RecordSet",
    "RngStream",
    "Sample",
    "Sampled",
    "SemiInfiniteAnchor",
    "SheetSample",
    "TestReport",
    "WindowTooSmallError",
    "airy_coord",
    "airy_time",
    "bessel_riesz_energy",
    "boundary_data",
    "build_checks",
    "capacity",
    "coalescence_tau",
    "coupling_residual",
    "decompose_bridge",
    "delta_m",
    "dilate",
    "evolve",
    "evolve_coupled",
    "geodesic_jump_time",
    "gue_lmax",
    "hitting_mc",
    "image_geometry",
    "ks_one_sample",
    "ks_two_sample",
    "linspace_grid",
    "lpp",
    "make_initial",
    "melon",
    "melon_top",
    "parabolic_dim",
    "path_length",
    "pitman",
    "projected_gradient_capacity",
    "quadrangle_cdf",
    "record_times",
    "reflect_with_boundary",
    "resample_nonintersecting",
    "rescale_sheet",
    "reversed_environment",
    "rightmost_geodesic",
    "run_acceptance",
    "run_suite",
    "sample_airy_ensemble",
    "sample_airy_sheet",
    "sample_bm",
    "sample_bridge",
    "sample_driving",
    "same_grid",
    "stationary_view",
    "thermal_energy",
    "validate_finitary",
    "wilson_ci",
]
