"""One-dimensional Skorokhod map with reflection at zero."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, PreconditionError
from .paths import GridPath

#: Absolute slack when comparing both sides of the oscillation bound.
TOL_NUM = 1e-12


def negative_part(x):
    """``max(-x, 0)``."""
    return np.maximum(-np.asarray(x, dtype=float), 0.0)


def regulator(values: np.ndarray) -> np.ndarray:
    """Running maximum of the negative part, ``l_i = max_{j<=i} (f_j)^-``."""
    return np.maximum.accumulate(negative_part(values))


@dataclass(frozen=True)
class ReflectionResult:
    input: GridPath
    reflected: GridPath
    regulator: GridPath


def reflect(f: GridPath, allow_negative_start: bool = False) -> ReflectionResult:
    """Solve the Skorokhod problem for ``f`` at the grid points.

    Between grid points ``g`` is the linear interpolant of its grid values, so
    positivity is only guaranteed at grid points. A negative ``f(0)`` is an
    error unless ``allow_negative_start`` is set, in which case the same
    formula applies and the regulator jumps to ``f(0)^-`` at time 0.
    """
    if f.values[0] < 0 and not allow_negative_start:
        raise PreconditionError(f"Skorokhod map needs f(0) >= 0, got {f.values[0]}")
    lv = regulator(f.values)
    gv = f.values + lv
    lv.flags.writeable = False
    gv.flags.writeable = False
    return ReflectionResult(f, GridPath(f.grid, gv, f.eta), GridPath(f.grid, lv, f.eta))


def complementarity_defect(res: ReflectionResult, eps: float = 0.0) -> float:
    """Regulator mass placed on cells where the reflected path stays above ``eps``."""
    if eps < 0:
        raise DomainError("eps must be nonnegative")
    g = res.reflected.values
    dl = np.diff(res.regulator.values)
    away = np.minimum(g[:-1], g[1:]) > eps
    return float(np.sum(dl[away]))


@dataclass(frozen=True)
class OscillationCheck:
    holds: bool
    lhs: float
    rhs: float


def _regulator_at(f: GridPath, t: float) -> float:
    # f is piecewise linear, so f^- peaks on [0, t] at a grid point or at t
    pts = f.grid.points
    k = np.searchsorted(pts, t, side="right")
    cand = np.append(f.values[:k], f.eval_scalar(t))
    return float(np.max(negative_part(cand)))


def oscillation_bound_holds(f: GridPath, s: float, t: float) -> OscillationCheck:
    """Check ``|l(t) - l(s)| <= sup_{-T<=u<=s} |f(t-s+u) - f(u)|``.

    ``f`` is extended to ``[-T, 0]`` by the constant ``f(0)``. The sup is taken
    over every breakpoint of both shifted copies, which is exact for a
    piecewise-linear ``f``.
    """
    T = f.grid.T
    if not 0.0 <= s < t <= T:
        raise DomainError(f"need 0 <= s < t <= T, got s={s}, t={t}")
    if f.values[0] < 0:
        raise PreconditionError("f(0) must be nonnegative")
    pts = f.grid.points
    h = t - s
    u = np.concatenate(([-T, 0.0, s], pts, pts - h))
    u = u[(u >= -T) & (u <= s)]

    def ext(x):
        return np.interp(np.maximum(x, 0.0), pts, f.values)

    rhs = float(np.max(np.abs(ext(u + h) - ext(u))))
    lhs = abs(_regulator_at(f, t) - _regulator_at(f, s))
    return OscillationCheck(lhs <= rhs + TOL_NUM, lhs, rhs)
