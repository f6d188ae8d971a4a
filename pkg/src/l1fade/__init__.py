"""Solver for linear time-fractional advection-diffusion-reaction equations.

The Caputo derivative of order ``0 < alpha < 1`` is discretised with the L1
formula on uniform or quasi-uniform (linearly decreasing step) temporal
meshes; space uses second-order central differences and each level is an
implicit tridiagonal solve.
"""

from l1fade.analysis import (
    ConvergenceReport,
    ConvergenceRow,
    convergence_sweep,
    max_error,
    observed_order,
    spatial_sweep,
)
from l1fade.caputo import (
    L1Weights,
    caputo_l1,
    gamma,
    generic_truncation_bound,
    l1_weights,
    memory_sum,
    memory_term,
    truncation_bound,
)
from l1fade.errors import (
    DivergenceError,
    DomainError,
    MissingExactSolutionError,
    SingularSystemError,
)
from l1fade.mesh import (
    MeshKind,
    SpatialGrid,
    TemporalMesh,
    build_quasi_uniform_mesh,
    build_spatial_grid,
    build_uniform_mesh,
)
from l1fade.model import (
    ExplicitSource,
    LaggedSource,
    LinearSource,
    ProblemSpec,
    example1,
    example2,
    example3,
    manufacture_source,
)
from l1fade.solver import SolutionHistory, perturbation_response, solve, step
from l1fade.tridiag import TridiagonalSystem, solve_tridiagonal

__all__ = [
    "ConvergenceReport",
    "ConvergenceRow",
    "DivergenceError",
    "DomainError",
    "ExplicitSource",
    "L1Weights",
    "LaggedSource",
    "LinearSource",
    "MeshKind",
    "MissingExactSolutionError",
    "ProblemSpec",
    "SingularSystemError",
    "SolutionHistory",
    "SpatialGrid",
    "TemporalMesh",
    "TridiagonalSystem",
    "build_quasi_uniform_mesh",
    "build_spatial_grid",
    "build_uniform_mesh",
    "caputo_l1",
    "convergence_sweep",
    "example1",
    "example2",
    "example3",
    "gamma",
    "generic_truncation_bound",
    "l1_weights",
    "manufacture_source",
    "max_error",
    "memory_sum",
    "memory_term",
    "observed_order",
    "perturbation_response",
    "solve",
    "solve_tridiagonal",
    "spatial_sweep",
    "step",
]
