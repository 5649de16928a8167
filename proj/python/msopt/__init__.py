"""Python bindings for the msopt multiscale optimization library."""

from ._msopt import (
    Error,
    Family,
    InvalidInput,
    LegendreSpec,
    OutOfDomain,
    coarsen,
    dyadic_points,
    exact_interp_bound,
    expected_pgd_bound,
    free_variables,
    gaussian_vector,
    generate_measurements,
    interpolate,
    legendre_family,
    legendre_value,
    midpoint_mask,
    pgd_iterations_needed,
    piecewise_distance_bound,
    project_affine,
    project_nonneg,
    project_row_simplex,
    project_scaled_simplex,
    tucker,
    vector_lipschitz,
)

__all__ = [name for name in dir() if not name.startswith("_")]
