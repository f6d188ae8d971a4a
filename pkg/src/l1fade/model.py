r"""Problem definitions for the time-fractional advection-diffusion-reaction model

.. math::

    D_t^\alpha u + K_1 u_x - K_2 u_{xx} = f, \qquad a < x < b,\ 0 < t \le T,

with ``u(x, 0) = phi(x)``, ``u(a, t) = varphi(t)`` and ``u(b, t) = psi(t)``.

All problem functions are evaluated on numpy arrays of ``x`` with a scalar
``t``; ``exact`` must also broadcast.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from l1fade.caputo import caputo_l1, check_alpha, gamma
from l1fade.errors import DomainError
from l1fade.mesh import build_quasi_uniform_mesh

SpaceFunction = Callable[[np.ndarray], np.ndarray]
TimeFunction = Callable[[float], float]
SpaceTimeFunction = Callable[[np.ndarray, float], np.ndarray]


def _fit(values, x: np.ndarray) -> np.ndarray:
    # constant-valued callables may return scalars
    if np.shape(values) == np.shape(x):
        return values
    return np.broadcast_to(values, np.shape(x))


@dataclass(frozen=True)
class ExplicitSource:
    """Source ``f(x, t)`` independent of the solution."""

    func: SpaceTimeFunction

    def __call__(self, x: np.ndarray, t: float, u_prev: np.ndarray) -> np.ndarray:
        return _fit(self.func(x, t), x)


@dataclass(frozen=True)
class LinearSource:
    """Reaction term ``f = rate * u``, evaluated at the previous time level."""

    rate: float

    def __call__(self, x: np.ndarray, t: float, u_prev: np.ndarray) -> np.ndarray:
        return self.rate * u_prev


@dataclass(frozen=True)
class LaggedSource:
    """General source ``f(x, t, u)`` evaluated at the previous time level."""

    func: Callable[[np.ndarray, float, np.ndarray], np.ndarray]

    def __call__(self, x: np.ndarray, t: float, u_prev: np.ndarray) -> np.ndarray:
        return _fit(self.func(x, t, u_prev), x)


SourceMode = Union[ExplicitSource, LinearSource, LaggedSource]


@dataclass(frozen=True)
class ProblemSpec:
    alpha: float
    K1: float
    K2: float
    a: float
    b: float
    T: float
    source: SourceMode
    initial: SpaceFunction
    boundary_left: TimeFunction
    boundary_right: TimeFunction
    exact: Optional[SpaceTimeFunction] = None
    name: str = "custom"

    def __post_init__(self) -> None:
        check_alpha(self.alpha)
        if not self.K2 > 0:
            raise ValueError(f"K2 must be positive, got K2={self.K2!r}")
        if not math.isfinite(self.K1):
            raise ValueError(f"K1 must be finite, got K1={self.K1!r}")
        if not self.b > self.a:
            raise ValueError(f"need a < b, got a={self.a!r}, b={self.b!r}")
        if not self.T > 0:
            raise ValueError(f"T must be positive, got T={self.T!r}")
        if not isinstance(self.source, (ExplicitSource, LinearSource, LaggedSource)):
            raise TypeError(f"unsupported source mode {type(self.source).__name__}")

    @property
    def has_exact(self) -> bool:
        return self.exact is not None

    def compatibility_defect(self, nx: int = 101, nt: int = 101) -> float:
        """Largest mismatch between ``exact`` and the initial/boundary data.

        Sampled on an ``nx`` by ``nt`` lattice of ``[a, b] x [0, T]``.
        """
        if self.exact is None:
            return 0.0
        x = np.linspace(self.a, self.b, nx)
        ts = np.linspace(0.0, self.T, nt)
        defect = float(np.max(np.abs(self.exact(x, 0.0) - self.initial(x))))
        for t in ts[1:]:
            ends = np.asarray(self.exact(np.array([self.a, self.b]), t))
            defect = max(
                defect,
                abs(ends[0] - self.boundary_left(t)),
                abs(ends[1] - self.boundary_right(t)),
            )
        return defect


def example1(alpha: float, exponent_beta: float = 5.0, T: float = 1.0) -> ProblemSpec:
    """Exponential-in-space test case with exact solution ``e^x t^beta``."""
    alpha = check_alpha(alpha)
    beta = float(exponent_beta)
    c = gamma(beta + 1.0) / gamma(beta + 1.0 - alpha)

    return ProblemSpec(
        alpha=alpha,
        K1=1.0,
        K2=1.0,
        a=0.0,
        b=1.0,
        T=T,
        source=ExplicitSource(lambda x, t: c * np.exp(x) * t ** (beta - alpha)),
        initial=lambda x: np.zeros_like(x, dtype=np.float64),
        boundary_left=lambda t: t**beta,
        boundary_right=lambda t: math.e * t**beta,
        exact=lambda x, t: np.exp(x) * t**beta,
        name="example1",
    )


def example2(alpha: float, T: float = 1.0) -> ProblemSpec:
    """Polynomial test case with exact solution ``x^2 t^3``."""
    alpha = check_alpha(alpha)
    c = 6.0 / gamma(4.0 - alpha)

    return ProblemSpec(
        alpha=alpha,
        K1=1.0,
        K2=1.0,
        a=0.0,
        b=1.0,
        T=T,
        source=ExplicitSource(
            lambda x, t: c * x**2 * t ** (3.0 - alpha) + 2.0 * t**3 * (x - 1.0)
        ),
        initial=lambda x: np.zeros_like(x, dtype=np.float64),
        boundary_left=lambda t: 0.0,
        boundary_right=lambda t: t**3,
        exact=lambda x, t: x**2 * t**3,
        name="example2",
    )


def example3(alpha: float, reaction_rate: float = 0.2, T: float = 1.0) -> ProblemSpec:
    """Transport of a species with first-order reaction on ``[0, 5]``.

    No exact solution is known.
    """
    alpha = check_alpha(alpha)

    return ProblemSpec(
        alpha=alpha,
        K1=1.0,
        K2=1.0,
        a=0.0,
        b=5.0,
        T=T,
        source=LinearSource(float(reaction_rate)),
        initial=lambda x: x**2 * (5.0 - x) ** 2,
        boundary_left=lambda t: 0.0,
        boundary_right=lambda t: 0.0,
        exact=None,
        name="example3",
    )


BUILTIN_PROBLEMS = {
    "example1": example1,
    "example2": example2,
    "example3": example3,
}


def manufacture_source(
    exact: SpaceTimeFunction,
    exact_x: SpaceTimeFunction,
    exact_xx: SpaceTimeFunction,
    alpha: float,
    K1: float,
    K2: float,
    N: int = 10_000,
) -> ExplicitSource:
    """Build the source that makes *exact* solve the model equation.

    The fractional time derivative at ``(x, t)`` is approximated by the L1
    formula on a quasi-uniform mesh of ``[0, t]`` with *N* steps; the space
    derivatives are supplied by the caller.
    """
    alpha = check_alpha(alpha)

    def f(x, t):
        x = np.asarray(x, dtype=np.float64)
        if t < 0:
            raise DomainError(f"t must be nonnegative, got t={t!r}")
        if t == 0:
            dtu = np.zeros_like(x)
        else:
            mesh = build_quasi_uniform_mesh(N, t)
            history = np.stack([np.broadcast_to(exact(x, s), x.shape) for s in mesh.nodes])
            dtu = caputo_l1(history, mesh, N, alpha)
        return dtu + K1 * exact_x(x, t) - K2 * exact_xx(x, t)

    return ExplicitSource(f)
