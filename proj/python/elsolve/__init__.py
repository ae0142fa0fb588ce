"""Matrix-free P1 finite element solvers on the unit square."""

from ._elsolve import (  # noqa: F401
    ConvergenceHistory,
    Error,
    Mesh,
    Problem,
    SpectralBounds,
    build_unit_square_mesh,
    chebyshev_roots,
    chebyshev_scaling_factor,
    model_eigen_bounds,
    model_eigenvalues_all,
    run_experiment,
    uniform_refine,
)

__all__ = [
    "ConvergenceHistory",
    "Error",
    "Mesh",
    "Problem",
    "SpectralBounds",
    "build_unit_square_mesh",
    "chebyshev_roots",
    "chebyshev_scaling_factor",
    "model_eigen_bounds",
    "model_eigenvalues_all",
    "run_experiment",
    "uniform_refine",
]
