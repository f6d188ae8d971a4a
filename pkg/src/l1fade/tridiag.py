"""Thomas algorithm for tridiagonal systems.

Single forward elimination and back substitution, no pivoting. The matrices
produced by the time stepper are diagonally dominant, so a vanishing pivot
signals a broken system and is reported rather than repaired.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from l1fade.errors import SingularSystemError

PIVOT_FLOOR = 1.0e-300


@dataclass(frozen=True, eq=False)
class TridiagonalSystem:
    """``lower[i-1] x[i-1] + diagonal[i] x[i] + upper[i] x[i+1] = rhs[i]``."""

    lower: np.ndarray
    diagonal: np.ndarray
    upper: np.ndarray
    rhs: np.ndarray

    def __post_init__(self) -> None:
        for name in ("lower", "diagonal", "upper", "rhs"):
            object.__setattr__(
                self, name, np.ascontiguousarray(getattr(self, name), dtype=np.float64)
            )
        m = self.diagonal.size
        if m < 1:
            raise ValueError("system must have at least one unknown")
        if self.rhs.shape != (m,):
            raise ValueError(f"rhs must have {m} entries, got {self.rhs.shape}")
        for name in ("lower", "upper"):
            if getattr(self, name).shape != (m - 1,):
                raise ValueError(
                    f"{name} must have {m - 1} entries, got {getattr(self, name).shape}"
                )
        if np.any(self.diagonal == 0.0):
            raise SingularSystemError("diagonal contains a zero entry")

    @property
    def size(self) -> int:
        return self.diagonal.size

    def matvec(self, x: np.ndarray) -> np.ndarray:
        y = self.diagonal * x
        y[1:] += self.lower * x[:-1]
        y[:-1] += self.upper * x[1:]
        return y

    def residual(self, x: np.ndarray) -> float:
        return float(np.max(np.abs(self.matvec(x) - self.rhs)))


@numba.njit(cache=True)
def _thomas(lower, diag, upper, rhs, out):
    # returns the index of the first bad pivot, or -1
    m = diag.shape[0]
    cp = np.empty(m)
    dp = np.empty(m)
    piv = diag[0]
    if not abs(piv) >= PIVOT_FLOOR:
        return 0
    cp[0] = upper[0] / piv if m > 1 else 0.0
    dp[0] = rhs[0] / piv
    for i in range(1, m):
        piv = diag[i] - lower[i - 1] * cp[i - 1]
        if not abs(piv) >= PIVOT_FLOOR:
            return i
        cp[i] = upper[i] / piv if i < m - 1 else 0.0
        dp[i] = (rhs[i] - lower[i - 1] * dp[i - 1]) / piv
    out[m - 1] = dp[m - 1]
    for i in range(m - 2, -1, -1):
        out[i] = dp[i] - cp[i] * out[i + 1]
    return -1


def solve_bands(
    lower: np.ndarray, diagonal: np.ndarray, upper: np.ndarray, rhs: np.ndarray
) -> np.ndarray:
    """Solve from raw band arrays without building a :class:`TridiagonalSystem`."""
    out = np.empty(diagonal.shape[0])
    bad = _thomas(lower, diagonal, upper, rhs, out)
    if bad >= 0:
        raise SingularSystemError(f"zero or denormal pivot in row {bad}")
    return out


def solve_tridiagonal(system: TridiagonalSystem) -> np.ndarray:
    return solve_bands(system.lower, system.diagonal, system.upper, system.rhs)


@numba.njit(cache=True)
def _thomas_constant(lower, diag, upper, rhs, out):
    m = rhs.shape[0]
    cp = np.empty(m)
    piv = diag
    if not abs(piv) >= PIVOT_FLOOR:
        return 0
    inv = 1.0 / piv
    cp[0] = upper * inv
    out[0] = rhs[0] * inv
    for i in range(1, m):
        piv = diag - lower * cp[i - 1]
        if not abs(piv) >= PIVOT_FLOOR:
            return i
        inv = 1.0 / piv
        cp[i] = upper * inv
        out[i] = (rhs[i] - lower * out[i - 1]) * inv
    for i in range(m - 2, -1, -1):
        out[i] -= cp[i] * out[i + 1]
    return -1


def solve_constant_bands(
    lower: float, diagonal: float, upper: float, rhs: np.ndarray, out=None
) -> np.ndarray:
    """Thomas algorithm for a matrix with constant bands (Toeplitz tridiagonal).

    The result is written to *out* when given.
    """
    rhs = np.ascontiguousarray(rhs, dtype=np.float64)
    if out is None:
        out = np.empty(rhs.shape[0])
    bad = _thomas_constant(float(lower), float(diagonal), float(upper), rhs, out)
    if bad >= 0:
        raise SingularSystemError(f"zero or denormal pivot in row {bad}")
    return out
