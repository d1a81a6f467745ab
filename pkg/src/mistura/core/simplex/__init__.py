from mistura.core.simplex.simplex import (
    DimensionMismatchError,
    InvalidDimensionError,
    SimplexError,
    SimplexIndexError,
    clamp_interior,
    clamp_rows,
    dirac,
    grid_array,
    inner,
    inner_rows,
    lattice,
    project_rows,
    project_simplex,
    simplex_grid,
    uniform,
)

__all__ = [
    "DimensionMismatchError",
    "InvalidDimensionError",
    "SimplexError",
    "SimplexIndexError",
    "clamp_interior",
    "clamp_rows",
    "dirac",
    "grid_array",
    "inner",
    "inner_rows",
    "lattice",
    "project_rows",
    "project_simplex",
    "simplex_grid",
    "uniform",
]
