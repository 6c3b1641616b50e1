"""Multigrid with ILU smoothers on hybrid tetrahedral grids."""

from ._mfilu import (
    ConfigError,
    SolverError,
    asymptotic_stencils,
    best_permutation,
    directions,
    dump_stencils,
    reorder,
    run,
    setting_keys,
    shape_names,
    smoothing_factor,
    stencil,
    sweep,
)

__all__ = [
    "ConfigError",
    "SolverError",
    "asymptotic_stencils",
    "best_permutation",
    "directions",
    "dump_stencils",
    "reorder",
    "run",
    "setting_keys",
    "shape_names",
    "smoothing_factor",
    "stencil",
    "sweep",
]
