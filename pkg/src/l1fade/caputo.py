r"""L1 discretisation of the Caputo derivative on an arbitrary temporal mesh.

For a mesh :math:`0 = t^0 < \dots < t^N` the L1 formula reads

.. math::

    D^\alpha v(t^n) \approx \frac{1}{\Gamma(2 - \alpha)}
        \sum_{k=1}^n T_{n,k} (v^k - v^{k-1}),
    \qquad
    T_{n,k} = \frac{(t^n - t^{k-1})^{1-\alpha} - (t^n - t^k)^{1-\alpha}}
                   {t^k - t^{k-1}}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numba
import numpy as np

from l1fade.errors import DomainError
from l1fade.mesh import TemporalMesh


def gamma(x: float) -> float:
    """Gamma function for ``x > 0``."""
    x = float(x)
    if not x > 0.0 or math.isinf(x):
        raise DomainError(f"gamma is only evaluated for finite x > 0, got {x!r}")
    return math.gamma(x)


def check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise DomainError(
            f"alpha must lie in the open interval (0, 1), got alpha={alpha!r}"
        )
    return alpha


@dataclass(frozen=True, eq=False)
class L1Weights:
    """Coefficients ``T_{n,1}, ..., T_{n,n}`` of time level ``n``.

    ``weights[k - 1]`` holds ``T_{n,k}``; the sentinel ``T_{n,0} = 0`` is
    implicit.
    """

    n: int
    alpha: float
    weights: np.ndarray

    def increments(self) -> np.ndarray:
        """Return ``T_{n,k+1} - T_{n,k}`` for ``k = 0, ..., n - 1``."""
        return np.diff(self.weights, prepend=0.0)


@numba.njit(cache=True)
def _fill_weights(t, n, alpha, out):
    p = 1.0 - alpha
    tn = t[n]
    for k in range(1, n):
        # a^p - b^p = b^p (exp(p log(1 + h/b)) - 1) with b = t^n - t^k > 0
        h = t[k] - t[k - 1]
        b = tn - t[k]
        out[k - 1] = math.exp(p * math.log(b)) * math.expm1(p * math.log1p(h / b)) / h
    out[n - 1] = (tn - t[n - 1]) ** (-alpha)


def l1_weights(mesh: TemporalMesh, n: int, alpha: float) -> L1Weights:
    alpha = check_alpha(alpha)
    if not 1 <= n <= mesh.N:
        raise ValueError(f"level n must satisfy 1 <= n <= {mesh.N}, got n={n!r}")
    w = np.empty(n)
    _fill_weights(mesh.nodes, n, alpha, w)
    return L1Weights(n=n, alpha=alpha, weights=w)


def _as_history(history, expected: int, what: str) -> np.ndarray:
    v = np.asarray(history, dtype=np.float64)
    if v.ndim == 0 or v.shape[0] != expected:
        got = 0 if v.ndim == 0 else v.shape[0]
        raise ValueError(f"{what} needs {expected} entries, got {got}")
    return v


def caputo_l1(history, mesh: TemporalMesh, n: int, alpha: float):
    """Evaluate the L1 approximation of the Caputo derivative at ``t^n``.

    *history* holds ``v(t^0), ..., v(t^n)`` along its first axis; any
    trailing axes are treated independently.
    """
    v = _as_history(history, n + 1, "history")
    w = l1_weights(mesh, n, alpha)
    dv = np.diff(v, axis=0)
    return np.tensordot(w.weights, dv, axes=1) / gamma(2.0 - w.alpha)


def memory_sum(history, weights: L1Weights, dt_n: float, increments=None):
    """Return ``dt_n^alpha * sum_{k=1}^{n-1} T_{n,k} (U^k - U^{k-1})``.

    This is the history part of the memory operator on its own. Callers that
    keep the level differences around may pass them as *increments* (shape
    ``(n - 1, ...)``).
    """
    n = weights.n
    U = _as_history(history, n, "history")
    if n == 1:
        return np.zeros_like(U[0]) if U.ndim > 1 else 0.0

    if increments is None:
        increments = np.diff(U, axis=0)
    elif increments.shape[0] != n - 1:
        raise ValueError(
            f"increments need {n - 1} rows for level {n}, got {increments.shape[0]}"
        )
    s = weights.weights[: n - 1] @ increments.reshape(n - 1, -1)
    s *= dt_n**weights.alpha
    return s.reshape(U.shape[1:]) if U.ndim > 1 else float(s[0])


def memory_term(history, weights: L1Weights, dt_n: float, increments=None):
    """Apply the memory operator to ``U^0, ..., U^{n-1}``.

    Returns ``U^{n-1} - dt_n^alpha * sum_{k=1}^{n-1} T_{n,k} (U^k - U^{k-1})``.
    The sum is empty for ``n = 1``.
    """
    U = _as_history(history, weights.n, "history")
    return U[weights.n - 1] - memory_sum(U, weights, dt_n, increments)


TruncationLevel = Literal["interior", "final"]


def truncation_bound(
    alpha: float, T: float, N: int, M2: float, level: TruncationLevel = "interior"
) -> float:
    """Upper bound on the L1 truncation error on the quasi-uniform mesh.

    *M2* is a bound on ``|v''|`` over the relevant interval. Levels
    ``n < N`` use the interior estimate, ``n = N`` the final-step estimate.
    """
    alpha = check_alpha(alpha)
    if not T > 0:
        raise DomainError(f"T must be positive, got T={T!r}")
    if isinstance(N, bool) or int(N) != N or N < 1:
        raise DomainError(f"N must be a positive integer, got N={N!r}")
    if not M2 >= 0:
        raise DomainError(f"M2 must be nonnegative, got M2={M2!r}")

    scale = M2 * T ** (2.0 - alpha) / gamma(1.0 - alpha)
    if level == "interior":
        c = 1.0 + alpha + 2.0 ** (1.0 - alpha) / (1.0 - alpha)
        return c * scale * (N + 1.0) ** (alpha - 2.0)
    if level == "final":
        c = (1.0 + alpha) / (1.0 - alpha) * 2.0 ** (1.0 - alpha)
        return c * scale * float(N) ** -2.0
    raise ValueError(f"level must be 'interior' or 'final', got {level!r}")


def generic_truncation_bound(
    mesh: TemporalMesh, n: int, alpha: float, M2: float
) -> float:
    """Truncation bound of level *n* valid on any mesh.

    ``(dt_n^2 / (2 (1 - alpha)) + dt_max^2 / 8) dt_n^-alpha M2 / Gamma(1 - alpha)``
    """
    alpha = check_alpha(alpha)
    if not 1 <= n <= mesh.N:
        raise ValueError(f"level n must satisfy 1 <= n <= {mesh.N}, got n={n!r}")
    if not M2 >= 0:
        raise DomainError(f"M2 must be nonnegative, got M2={M2!r}")
    dt = mesh.step(n)
    dt_max = float(mesh.steps.max())
    r = (dt**2 / (2.0 * (1.0 - alpha)) + dt_max**2 / 8.0) * dt ** (-alpha)
    return r * M2 / gamma(1.0 - alpha)
