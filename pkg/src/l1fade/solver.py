"""Implicit finite-difference time stepper.

At level ``n`` the interior unknowns solve the tridiagonal system

    (-k1 - k2) U_{j-1} + (1 + 2 k2) U_j + (k1 - k2) U_{j+1}
        = [memory operator](U^0..U^{n-1})_j + fscale * f_j

with ``k1 = K1 dt^a G / (2 dx)``, ``k2 = K2 dt^a G / dx^2``,
``fscale = dt^a G`` and ``G = Gamma(2 - alpha)``. Boundary values come from
the Dirichlet data.

Each level is computed as a correction to the previous one: the same matrix
is applied to ``U^n - U^{n-1}`` and the right-hand side is the residual of
``U^{n-1}`` (with the new boundary values) in the system above. This is the
same linear system, but roundoff no longer scales with the magnitude of
``U`` and constant states are reproduced exactly.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numba
import numpy as np

from l1fade.caputo import gamma, l1_weights
from l1fade.errors import DivergenceError, SingularSystemError
from l1fade.mesh import (
    MeshKind,
    SpatialGrid,
    TemporalMesh,
    build_spatial_grid,
    build_temporal_mesh,
)
from l1fade.model import ProblemSpec
from l1fade.tridiag import PIVOT_FLOOR

logger = logging.getLogger(__name__)


class PecletWarning(UserWarning):
    """Cell Peclet number above one: the matrix may lose diagonal dominance."""


@dataclass(frozen=True)
class SchemeCoefficients:
    K1hat: float
    K2hat: float
    Fscale: float

    @classmethod
    def for_step(
        cls, problem: ProblemSpec, dx: float, dt_n: float
    ) -> SchemeCoefficients:
        scale = dt_n**problem.alpha * gamma(2.0 - problem.alpha)
        return cls(
            K1hat=problem.K1 * scale / (2.0 * dx),
            K2hat=problem.K2 * scale / dx**2,
            Fscale=scale,
        )

    @property
    def lower(self) -> float:
        return -self.K1hat - self.K2hat

    @property
    def diagonal(self) -> float:
        return 1.0 + 2.0 * self.K2hat

    @property
    def upper(self) -> float:
        return self.K1hat - self.K2hat

    def bands(self, m: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return (
            np.full(m - 1, self.lower),
            np.full(m, self.diagonal),
            np.full(m - 1, self.upper),
        )


@dataclass(frozen=True, eq=False)
class SolutionHistory:
    """All levels ``U^0..U^N`` on the grid, shape ``(N + 1, J + 1)``.

    Levels that have not been computed yet are NaN.
    """

    levels: np.ndarray
    mesh: TemporalMesh
    grid: SpatialGrid

    @property
    def final(self) -> np.ndarray:
        return self.levels[-1]

    def profile(self, t: float) -> tuple[float, np.ndarray]:
        """Return ``(t^n, U^n)`` for the last node ``t^n <= t``."""
        n = self.mesh.snap(t)
        return float(self.mesh.nodes[n]), self.levels[n]


def cell_peclet(problem: ProblemSpec, dx: float) -> float:
    return abs(problem.K1) * dx / (2.0 * problem.K2)


def _check_peclet(problem: ProblemSpec, grid: SpatialGrid) -> None:
    pe = cell_peclet(problem, grid.dx)
    if pe > 1.0:
        warnings.warn(
            f"cell Peclet number {pe:.3g} > 1; the tridiagonal matrix may not be "
            "diagonally dominant",
            PecletWarning,
            stacklevel=3,
        )


def _boundary(problem: ProblemSpec, t: float) -> tuple[float, float]:
    return float(problem.boundary_left(t)), float(problem.boundary_right(t))


@numba.njit(cache=True)
def _increment_step(new, hist, hist_scale, src, fscale, k1, k2, bands, cp, y, inc):
    """Residual assembly and constant-band Thomas solve, fused.

    *new* holds the previous level with the new boundary values; its interior
    is updated in place and the level differences are written to *inc*.
    Returns -1 on success, the row of a vanishing pivot, or -2 when the new
    level is not finite.
    """
    lower, diag, upper = bands
    m = hist.shape[0]
    cp_prev = 0.0
    y_prev = 0.0
    for i in range(m):
        j = i + 1
        r = fscale * src[i] - hist_scale * hist[i]
        r -= k1 * (new[j + 1] - new[j - 1])
        r += k2 * ((new[j + 1] - new[j]) - (new[j] - new[j - 1]))
        piv = diag - lower * cp_prev
        if not abs(piv) >= PIVOT_FLOOR:
            return i
        inv = 1.0 / piv
        cp_prev = upper * inv
        y_prev = (r - lower * y_prev) * inv
        cp[i] = cp_prev
        y[i] = y_prev
    if not (math.isfinite(new[0]) and math.isfinite(new[m + 1])):
        return -2
    d = 0.0
    for i in range(m - 1, -1, -1):
        d = y[i] - cp[i] * d
        old = new[i + 1]
        v = old + d
        if not math.isfinite(v):
            return -2
        new[i + 1] = v
        inc[i] = v - old
    return -1


def _advance(
    levels: np.ndarray,
    increments: Optional[np.ndarray],
    n: int,
    problem: ProblemSpec,
    mesh: TemporalMesh,
    grid: SpatialGrid,
    coeffs: SchemeCoefficients,
    work: Optional[np.ndarray] = None,
    inc_out: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Compute level *n*; ``U^n - U^{n-1}`` (interior) goes to *inc_out*."""
    t_n = float(mesh.nodes[n])
    dt_n = mesh.step(n)
    J = grid.J
    if increments is None:
        increments = np.diff(levels[:n, 1:J], axis=0)
    if work is None:
        work = np.empty((2, J - 1))
    if inc_out is None:
        inc_out = np.empty(J - 1)

    # Solve for the change from the previous level: the right-hand side is
    # the scheme residual of that level, written with differences so a
    # constant state gives an exactly zero residual.
    weights = l1_weights(mesh, n, problem.alpha).weights
    hist = weights[: n - 1] @ increments
    src = problem.source(grid.nodes[1:J], t_n, levels[n - 1, 1:J])

    new = levels[n - 1].copy()
    new[0], new[J] = _boundary(problem, t_n)
    status = _increment_step(
        new, hist, dt_n**problem.alpha, src, coeffs.Fscale, coeffs.K1hat, coeffs.K2hat,
        (coeffs.lower, coeffs.diagonal, coeffs.upper), work[0], work[1], inc_out,
    )
    if status == -2:
        raise DivergenceError(f"non-finite values at level n={n}, t={t_n!r}")
    if status >= 0:
        raise SingularSystemError(f"zero pivot in row {status} at level n={n}")
    return new


def initial_level(problem: ProblemSpec, grid: SpatialGrid) -> np.ndarray:
    return np.array(
        np.broadcast_to(problem.initial(grid.nodes), grid.nodes.shape), dtype=np.float64
    )


def step(history: SolutionHistory, problem: ProblemSpec, n: int) -> np.ndarray:
    """Compute level ``U^n`` from a history filled through level ``n - 1``.

    The history is not modified.
    """
    if not 1 <= n <= history.mesh.N:
        raise ValueError(f"level n must satisfy 1 <= n <= {history.mesh.N}, got {n}")
    if not np.all(np.isfinite(history.levels[:n])):
        raise ValueError(f"history is not filled through level {n - 1}")
    coeffs = SchemeCoefficients.for_step(
        problem, history.grid.dx, history.mesh.step(n)
    )
    return _advance(
        history.levels, None, n, problem, history.mesh, history.grid, coeffs
    )


def solve(
    problem: ProblemSpec,
    N: int,
    J: int,
    mesh_kind: MeshKind | str = MeshKind.QUASI_UNIFORM,
    initial: Optional[np.ndarray] = None,
) -> SolutionHistory:
    """Run the scheme from ``t = 0`` to ``t = T``.

    *initial*, when given, replaces the sampled initial data (length
    ``J + 1``).
    """
    mesh = build_temporal_mesh(mesh_kind, N, problem.T)
    grid = build_spatial_grid(problem.a, problem.b, J)
    _check_peclet(problem, grid)

    levels = np.empty((mesh.N + 1, grid.J + 1))
    if initial is None:
        levels[0] = initial_level(problem, grid)
    else:
        initial = np.asarray(initial, dtype=np.float64)
        if initial.shape != (grid.J + 1,):
            raise ValueError(
                f"initial data must have {grid.J + 1} entries, got {initial.shape}"
            )
        levels[0] = initial
    if not np.all(np.isfinite(levels[0])):
        raise DivergenceError("initial data contains non-finite values")

    # interior level differences, reused by the memory operator
    increments = np.empty((mesh.N, grid.J - 1))
    work = np.empty((2, grid.J - 1))
    coeffs = None
    for n in range(1, mesh.N + 1):
        dt_n = mesh.step(n)
        if coeffs is None or mesh.kind is not MeshKind.UNIFORM:
            coeffs = SchemeCoefficients.for_step(problem, grid.dx, dt_n)
        levels[n] = _advance(
            levels, increments[: n - 1], n, problem, mesh, grid, coeffs,
            work, increments[n - 1],
        )

    logger.debug("solved %s: N=%d J=%d mesh=%s", problem.name, N, J, mesh.kind.value)
    return SolutionHistory(levels=levels, mesh=mesh, grid=grid)


def perturbation_response(
    problem: ProblemSpec,
    N: int,
    J: int,
    mesh_kind: MeshKind | str,
    perturbation,
) -> np.ndarray:
    """Max-norm of the difference between a perturbed and an unperturbed run.

    *perturbation* is added to the initial data; it must vanish at both
    boundary nodes. Returns ``||rho^n||_inf`` for ``n = 0..N``.
    """
    rho0 = np.asarray(perturbation, dtype=np.float64)
    if rho0.shape != (J + 1,):
        raise ValueError(f"perturbation must have {J + 1} entries, got {rho0.shape}")
    if rho0[0] != 0.0 or rho0[-1] != 0.0:
        raise ValueError("perturbation must vanish at the boundary nodes")

    grid = build_spatial_grid(problem.a, problem.b, J)
    base = initial_level(problem, grid)
    ref = solve(problem, N, J, mesh_kind, initial=base)
    pert = solve(problem, N, J, mesh_kind, initial=base + rho0)
    return np.max(np.abs(pert.levels - ref.levels), axis=1)
