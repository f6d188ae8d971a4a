"""Error norms, observed orders and refinement sweeps."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from l1fade.errors import DomainError, MissingExactSolutionError
from l1fade.mesh import MeshKind
from l1fade.model import ProblemSpec
from l1fade.solver import SolutionHistory, solve


def max_error(history: SolutionHistory, exact: Optional[Callable]) -> float:
    """Largest nodal error at the final level over ``j = 1..J``."""
    if exact is None:
        raise MissingExactSolutionError("max_error needs an exact solution")
    x = history.grid.nodes[1:]
    t_final = float(history.mesh.nodes[-1])
    u = np.broadcast_to(exact(x, t_final), x.shape)
    return float(np.max(np.abs(u - history.final[1:])))


def observed_order(e_coarse: float, e_fine: float) -> float:
    """``log2(e_coarse / e_fine)`` for errors on a grid and its refinement."""
    if not (e_coarse > 0 and e_fine > 0):
        raise DomainError(
            f"observed order needs positive errors, got {e_coarse!r} and {e_fine!r}"
        )
    return math.log2(e_coarse / e_fine)


@dataclass(frozen=True)
class ConvergenceRow:
    """Error at one resolution; ``order`` is None on the first row and when
    either error of the pair is exactly zero."""

    resolution: int
    e_inf: float
    order: Optional[float] = None


@dataclass(frozen=True)
class ConvergenceReport:
    """One error/order column pair of a refinement study.

    ``refined`` is ``"N"`` for temporal sweeps at fixed ``J`` and ``"J"`` for
    spatial sweeps at fixed ``N``; ``fixed`` holds the other resolution.
    """

    problem: str
    alpha: float
    mesh_kind: MeshKind
    refined: str
    fixed: int
    rows: tuple[ConvergenceRow, ...] = field(default_factory=tuple)

    @property
    def errors(self) -> list[float]:
        return [r.e_inf for r in self.rows]

    @property
    def orders(self) -> list[Optional[float]]:
        return [r.order for r in self.rows]


def _check_doubling(values: Sequence[int], what: str) -> list[int]:
    values = [int(v) for v in values]
    if not values:
        raise ValueError(f"{what} must not be empty")
    for coarse, fine in zip(values, values[1:]):
        if fine != 2 * coarse:
            raise ValueError(f"{what} must double between entries, got {values}")
    return values


def _rows(errors: list[float], sizes: list[int]) -> tuple[ConvergenceRow, ...]:
    rows = [ConvergenceRow(sizes[0], errors[0])]
    for i in range(1, len(sizes)):
        order = None
        if errors[i - 1] > 0 and errors[i] > 0:
            order = observed_order(errors[i - 1], errors[i])
        rows.append(ConvergenceRow(sizes[i], errors[i], order))
    return tuple(rows)


def convergence_sweep(
    problem: ProblemSpec,
    J: int,
    N_list: Sequence[int],
    mesh_kind: MeshKind | str = MeshKind.QUASI_UNIFORM,
) -> ConvergenceReport:
    """Temporal refinement at fixed ``J``."""
    if problem.exact is None:
        raise MissingExactSolutionError(
            f"problem {problem.name!r} has no exact solution to measure errors against"
        )
    mesh_kind = MeshKind(mesh_kind)
    N_list = _check_doubling(N_list, "N_list")
    errors = [max_error(solve(problem, N, J, mesh_kind), problem.exact) for N in N_list]
    return ConvergenceReport(
        problem=problem.name,
        alpha=problem.alpha,
        mesh_kind=mesh_kind,
        refined="N",
        fixed=int(J),
        rows=_rows(errors, N_list),
    )


def spatial_sweep(
    problem: ProblemSpec,
    N_fixed: int,
    J_list: Sequence[int],
    mesh_kind: MeshKind | str = MeshKind.QUASI_UNIFORM,
) -> ConvergenceReport:
    """Spatial refinement at fixed ``N``.

    ``N_fixed`` has to be large enough for the temporal error to be
    negligible; otherwise the observed orders flatten out.
    """
    if problem.exact is None:
        raise MissingExactSolutionError(
            f"problem {problem.name!r} has no exact solution to measure errors against"
        )
    mesh_kind = MeshKind(mesh_kind)
    J_list = _check_doubling(J_list, "J_list")
    errors = [
        max_error(solve(problem, N_fixed, J, mesh_kind), problem.exact) for J in J_list
    ]
    return ConvergenceReport(
        problem=problem.name,
        alpha=problem.alpha,
        mesh_kind=mesh_kind,
        refined="J",
        fixed=int(N_fixed),
        rows=_rows(errors, J_list),
    )
