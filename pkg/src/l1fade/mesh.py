"""Temporal meshes on ``[0, T]`` and the uniform spatial grid."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np


class MeshKind(str, enum.Enum):
    UNIFORM = "uniform"
    QUASI_UNIFORM = "quasi"


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.float64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class TemporalMesh:
    """Ordered time nodes ``t^0 = 0 < ... < t^N = T`` with their steps.

    The steps are the differences of the stored nodes, so increments of any
    function sampled on the nodes see exactly the same step sizes.
    """

    nodes: np.ndarray
    kind: MeshKind
    steps: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        nodes = _frozen(self.nodes)
        if nodes.ndim != 1 or nodes.size < 2 or nodes[0] != 0.0:
            raise ValueError("mesh nodes must be a 1-D array starting at 0 with N >= 1")
        steps = np.diff(nodes)
        if not np.all(steps > 0):
            raise ValueError("mesh nodes must be strictly increasing")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "kind", MeshKind(self.kind))
        object.__setattr__(self, "steps", _frozen(steps))

    @property
    def N(self) -> int:
        return self.steps.size

    @property
    def T(self) -> float:
        return float(self.nodes[-1])

    @property
    def ratio(self) -> float:
        """Ratio of the largest to the smallest step."""
        return float(self.steps.max() / self.steps.min())

    def step(self, n: int) -> float:
        """Return ``dt^n = t^n - t^{n-1}`` for ``1 <= n <= N``."""
        return float(self.steps[n - 1])

    def snap(self, t: float) -> int:
        """Index of the last node at or below *t* (with a roundoff allowance)."""
        T = self.T
        if t < -1.0e-12 * T or t > T * (1.0 + 1.0e-12):
            raise ValueError(f"time {t!r} lies outside [0, {T!r}]")
        idx = int(np.searchsorted(self.nodes, t + 1.0e-12 * T, side="right")) - 1
        return max(idx, 0)


def _check_args(N: int, T: float) -> None:
    if isinstance(N, bool) or int(N) != N or N < 1:
        raise ValueError(f"N must be a positive integer, got N={N!r}")
    if not (np.isfinite(T) and T > 0):
        raise ValueError(f"T must be a positive time, got T={T!r}")


def _from_nodes(nodes: np.ndarray, T: float, kind: MeshKind) -> TemporalMesh:
    nodes[0] = 0.0
    nodes[-1] = T
    return TemporalMesh(nodes=nodes, kind=kind)


def build_quasi_uniform_mesh(N: int, T: float) -> TemporalMesh:
    r"""Mesh with linearly decreasing steps ``dt^n = (N + 1 - n) mu``.

    With :math:`\mu = 2T / (N(N+1))` the first step is ``2T/(N+1)`` and the
    last one ``2T/(N(N+1))``, so nodes cluster towards ``t = T``.
    """
    _check_args(N, T)
    N = int(N)
    mu = 2.0 * T / (N * (N + 1))
    n = np.arange(N + 1, dtype=np.float64)
    # closed-form partial sums: t^n = mu * n * (2N + 1 - n) / 2
    nodes = 0.5 * mu * n * (2 * N + 1 - n)
    return _from_nodes(nodes, float(T), MeshKind.QUASI_UNIFORM)


def build_uniform_mesh(N: int, T: float) -> TemporalMesh:
    _check_args(N, T)
    N = int(N)
    nodes = T * (np.arange(N + 1, dtype=np.float64) / N)
    return _from_nodes(nodes, float(T), MeshKind.UNIFORM)


def build_temporal_mesh(kind: MeshKind | str, N: int, T: float) -> TemporalMesh:
    kind = MeshKind(kind)
    if kind is MeshKind.UNIFORM:
        return build_uniform_mesh(N, T)
    return build_quasi_uniform_mesh(N, T)


@dataclass(frozen=True, eq=False)
class SpatialGrid:
    a: float
    b: float
    J: int
    nodes: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if isinstance(self.J, bool) or int(self.J) != self.J or self.J < 2:
            raise ValueError(f"J must be an integer >= 2, got J={self.J!r}")
        if not (np.isfinite(self.a) and np.isfinite(self.b) and self.b > self.a):
            raise ValueError(f"need a < b, got a={self.a!r}, b={self.b!r}")
        object.__setattr__(self, "J", int(self.J))
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "b", float(self.b))
        nodes = self.a + np.arange(self.J + 1) * self.dx
        nodes[-1] = self.b
        object.__setattr__(self, "nodes", _frozen(nodes))

    @property
    def dx(self) -> float:
        return (self.b - self.a) / self.J


def build_spatial_grid(a: float, b: float, J: int) -> SpatialGrid:
    return SpatialGrid(a, b, J)
