"""Dyadic grids, path containers, segment views and discrete function-space norms."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np
from scipy.special import gamma

from . import _kernels
from .errors import DomainError

#: Points per history cell used when sampling the initial function.
ETA_SUBSAMPLES = 8
_SNAP = 1e-9


@dataclass(frozen=True)
class Grid:
    """Uniform dyadic partition ``t_i = i * T / 2**n`` of ``[0, T]``."""

    T: float
    n: int

    def __post_init__(self):
        if not (self.T > 0 and math.isfinite(self.T)):
            raise DomainError(f"horizon T must be positive and finite, got {self.T}")
        if int(self.n) != self.n or self.n < 0:
            raise DomainError(f"dyadic level must be a nonnegative integer, got {self.n}")

    @property
    def size(self) -> int:
        """Number of cells, ``2**n``."""
        return 1 << self.n

    @property
    def delta(self) -> float:
        # scaling by a power of two is exact in binary floating point
        return math.ldexp(self.T, -self.n)

    @cached_property
    def points(self) -> np.ndarray:
        pts = np.arange(self.size + 1) * self.delta
        pts[-1] = self.T
        pts.flags.writeable = False
        return pts

    def coarsen(self, n: int) -> "Grid":
        if n > self.n:
            raise DomainError(f"cannot coarsen level {self.n} to finer level {n}")
        return Grid(self.T, n)

    def index_of(self, t: float) -> int:
        """Index of grid point ``t``; raises if ``t`` is not a grid point."""
        u = t / self.delta
        i = round(u)
        if abs(u - i) > _SNAP or not 0 <= i <= self.size:
            raise DomainError(f"time {t} is not a point of {self}")
        return int(i)


def k_n(s: float, grid: Grid) -> float:
    """Largest grid point not exceeding ``s`` (with ``k_n(T) = T``)."""
    if not 0.0 <= s <= grid.T:
        raise DomainError(f"s={s} outside [0, {grid.T}]")
    if s == grid.T:
        return grid.T
    u = s / grid.delta
    i = math.floor(u)
    if round(u) != i and abs(u - round(u)) < _SNAP:
        i = round(u)
    return i * grid.delta


@dataclass(frozen=True)
class InitialCondition:
    """The history ``eta`` on ``[-r, 0]`` with its declared Hölder exponent."""

    func: Callable
    r: float
    theta: float = 1.0

    def __post_init__(self):
        if not self.r > 0:
            raise DomainError(f"delay r must be positive, got {self.r}")
        if not 0 < self.theta <= 1:
            raise DomainError(f"theta must lie in (0, 1], got {self.theta}")

    def __call__(self, t):
        return self.func(t)

    @property
    def at_zero(self) -> float:
        return float(self.func(0.0))

    @classmethod
    def constant(cls, c: float, r: float) -> "InitialCondition":
        return cls(lambda t: np.zeros_like(t, dtype=float) + c, r, 1.0)


@dataclass(frozen=True)
class GridPath:
    """Values on a dyadic grid, continued by ``eta`` on ``[-r, 0]``.

    Between grid points the path is linearly interpolated.
    """

    grid: Grid
    values: np.ndarray
    eta: InitialCondition = field(repr=False)

    def __post_init__(self):
        if self.values.shape != (self.grid.size + 1,):
            raise DomainError(
                f"expected {self.grid.size + 1} values, got shape {self.values.shape}"
            )

    @property
    def r(self) -> float:
        return self.eta.r

    @classmethod
    def from_function(cls, f, grid: Grid, eta: InitialCondition) -> "GridPath":
        vals = np.asarray(f(grid.points), dtype=float)
        vals.flags.writeable = False
        return cls(grid, vals, eta)

    def __call__(self, t):
        return self.eval(t)

    def eval_scalar(self, t: float) -> float:
        if t < 0.0:
            return float(self.eta(t))
        u = t / self.grid.delta
        j = int(u)
        frac = u - j
        if frac > 1.0 - _SNAP:
            j, frac = j + 1, 0.0
        elif frac < _SNAP:
            frac = 0.0
        if j >= self.grid.size:
            return float(self.values[self.grid.size])
        if frac == 0.0:
            return float(self.values[j])
        v0 = self.values[j]
        return float(v0 + frac * (self.values[j + 1] - v0))

    def eval(self, t):
        if np.ndim(t) == 0:
            return self.eval_scalar(float(t))
        t = np.asarray(t, dtype=float)
        out = np.interp(t, self.grid.points, self.values)
        neg = t < 0
        if neg.any():
            out[neg] = self.eta(t[neg])
        return out

    def segment(self, anchor: float) -> "Segment":
        return Segment(self, anchor)


@dataclass(frozen=True)
class Segment:
    """The window ``s -> x(anchor + s)`` for ``s in [-r, 0]``."""

    base: GridPath
    anchor: float

    def eval(self, s):
        return self.base.eval(self.anchor + s)

    __call__ = eval

    def sup_norm(self) -> float:
        ts = sample_times(self.base, self.anchor - self.base.r, self.anchor)
        return float(np.max(np.abs(self.base.eval(ts))))


def sample_times(path: GridPath, a: float, b: float) -> np.ndarray:
    """Evaluation points for sup-type quantities on ``[a, b]``.

    Grid points inside the window, both endpoints, and ``ETA_SUBSAMPLES``
    points per history cell (cells of width ``delta`` laid back from 0).
    """
    if b < a:
        raise DomainError(f"empty window [{a}, {b}]")
    d = path.grid.delta
    pts = [np.array([a, b])]
    lo, hi = max(a, 0.0), min(b, path.grid.T)
    if hi >= lo:
        i0 = math.ceil(lo / d - _SNAP)
        i1 = math.floor(hi / d + _SNAP)
        if i1 >= i0:
            pts.append(path.grid.points[i0 : i1 + 1])
    if a < 0:
        hi_eta = min(b, 0.0)
        c0 = math.floor(a / d)
        c1 = math.ceil(hi_eta / d)
        offs = np.arange(ETA_SUBSAMPLES) / ETA_SUBSAMPLES
        cells = np.arange(c0, c1)
        eta_pts = ((cells[:, None] + offs[None, :]) * d).ravel()
        eta_pts = eta_pts[(eta_pts >= a) & (eta_pts <= hi_eta)]
        pts.append(eta_pts)
    return np.unique(np.concatenate(pts))


def segment_distance(path: GridPath, t1: float, t2: float) -> float:
    """``sup_{-r<=v<=0} |x(t1 + v) - x(t2 + v)|`` over all breakpoints of either shift."""
    r = path.r
    v = np.concatenate(
        (
            sample_times(path, t1 - r, t1) - t1,
            sample_times(path, t2 - r, t2) - t2,
        )
    )
    v = v[(v >= -r) & (v <= 0)]
    return float(np.max(np.abs(path.eval(t1 + v) - path.eval(t2 + v))))


def sup_norm(path: GridPath, t: float | None = None) -> float:
    """``sup_{-r<=u<=t} |x(u)|``; ``t`` defaults to the horizon."""
    t = path.grid.T if t is None else t
    return float(np.max(np.abs(path.eval(sample_times(path, -path.r, t)))))


def _pairwise_holder(ts, vs, mu):
    best = 0.0
    for k in range(1, ts.size):
        dt = ts[k:] - ts[:-k]
        dv = np.abs(vs[k:] - vs[:-k])
        best = max(best, float(np.max(dv / dt**mu)))
    return best


def holder_seminorm(path: GridPath, mu: float, window=None) -> float:
    """Discrete ``sup |f(t)-f(s)| / (t-s)**mu`` over sampled pairs in ``window``."""
    if not 0 < mu <= 1:
        raise DomainError(f"Hölder exponent must lie in (0, 1], got {mu}")
    a, b = (0.0, path.grid.T) if window is None else window
    if not (-path.r - _SNAP <= a < b <= path.grid.T + _SNAP):
        raise DomainError(f"window [{a}, {b}] not inside [-r, T]")
    ts = sample_times(path, a, b)
    if ts.size < 2:
        raise DomainError("need at least two evaluation points")
    return _pairwise_holder(ts, path.eval(ts), mu)


def holder_seminorm_values(values: np.ndarray, delta: float, mu: float) -> float:
    """Discrete Hölder seminorm of samples on a uniform grid."""
    values = np.asarray(values, dtype=float)
    best = 0.0
    for k in range(1, values.size):
        dv = np.max(np.abs(values[k:] - values[:-k]))
        best = max(best, float(dv) / (k * delta) ** mu)
    return best


def norm_inf_alpha(path: GridPath, alpha: float, t: float) -> float:
    r"""Discrete :math:`\|f\|_{\infty,\alpha,t}`.

    The outer integral over ``s in [0, t]`` uses the midpoint of each cell of
    width ``delta``. For a midpoint ``s_j`` with ``h = t - s_j`` the inner sup
    of ``|f(u + h) - f(u)|`` runs over ``u in {-r} U (delta/2 lattice in [-r, s_j]) U {s_j}``.
    With these nested sample sets the result is nondecreasing along grid points.
    """
    if not 0 < alpha < 0.5:
        raise DomainError(f"alpha must lie in (0, 1/2), got {alpha}")
    T = path.grid.T
    if not 0.0 <= t <= T:
        raise DomainError(f"t={t} outside [0, {T}]")
    d = path.grid.delta
    r = path.r
    head = sup_norm(path, t)
    if t == 0.0:
        return head
    n_cells = math.ceil(t / d - _SNAP)
    half = 0.5 * d
    lattice = np.arange(math.ceil(-r / half - _SNAP), math.floor(t / half + _SNAP) + 1) * half
    lattice = lattice[lattice >= -r]
    total = 0.0
    for j in range(n_cells):
        lo = j * d
        hi = min((j + 1) * d, t)
        s_mid = 0.5 * (lo + hi)
        h = t - s_mid
        u = lattice[lattice <= s_mid + _SNAP * d]
        u = np.concatenate(([-r], u, [s_mid]))
        inner = np.max(np.abs(path.eval(np.minimum(u + h, t)) - path.eval(u)))
        total += inner * h ** (-alpha - 1.0) * (hi - lo)
    return head + total


def _check_driver_interval(grid, a, b):
    a = 0.0 if a is None else a
    b = grid.T if b is None else b
    ia, ib = grid.index_of(a), grid.index_of(b)
    if ib - ia < 1:
        raise DomainError("need at least two grid points")
    return ia, ib


def norm_one_minus_alpha_inf_values(values: np.ndarray, h: float, alpha: float) -> float:
    """``sup_{u<v} ( |g(v)-g(u)|/(v-u)^(1-alpha) + int_u^v |g(y)-g(u)|/(y-u)^(2-alpha) dy )``
    over node pairs, with the inner integral exact for the linear interpolant."""
    g = np.asarray(values, dtype=float)
    N = g.size - 1
    if N < 1:
        raise DomainError("need at least two points")
    p = 2.0 - alpha
    best = 0.0
    for i in range(N):
        e = g[i:] - g[i]
        m = np.arange(N - i)
        cells = _kernels.abs_cell_integrals(e[:-1], e[1:], m, h, p)
        inner = np.cumsum(cells)
        lag = (m + 1) * h
        first = np.abs(e[1:]) / lag ** (1.0 - alpha)
        best = max(best, float(np.max(first + inner)))
    return best


def norm_one_minus_alpha_inf(driver, alpha: float, a=None, b=None) -> float:
    """Discrete ``||g||_{1-alpha, inf, [a,b]}`` of a driver (grid-aligned ``a``, ``b``)."""
    if not 0 < alpha < 0.5:
        raise DomainError(f"alpha must lie in (0, 1/2), got {alpha}")
    ia, ib = _check_driver_interval(driver.grid, a, b)
    return norm_one_minus_alpha_inf_values(driver.values[ia : ib + 1], driver.grid.delta, alpha)


def lambda_alpha_bound(driver, alpha: float, a=None, b=None) -> float:
    """Upper bound ``||g||_{1-alpha,inf} / (Gamma(1-alpha) Gamma(alpha))`` for Lambda_alpha(g)."""
    return norm_one_minus_alpha_inf(driver, alpha, a, b) / (gamma(1.0 - alpha) * gamma(alpha))


def norm_alpha_one_values(values: np.ndarray, h: float, alpha: float) -> float:
    """Discrete ``||f||_{alpha,1}`` of samples on uniform nodes ``a + k h``.

    Inner integrals are exact for the linear interpolant; the outer
    integral of the double term uses the trapezoid rule.
    """
    if not 0 < alpha < 1:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    f = np.asarray(values, dtype=float)
    M = f.size - 1
    if M < 1:
        raise DomainError("need at least two points")
    m = np.arange(M)
    head = float(np.sum(_kernels.abs_cell_integrals(f[:-1], f[1:], m, h, alpha)))
    inner = np.zeros(M + 1)
    p = 1.0 + alpha
    for k in range(1, M + 1):
        e = f[k] - f[k::-1]  # e[j] sits at distance j*h back from s_k
        inner[k] = np.sum(_kernels.abs_cell_integrals(e[:-1], e[1:], m[:k], h, p))
    return head + float(np.trapezoid(inner, dx=h))


@dataclass(frozen=True)
class NormReport:
    kind: str
    alpha_or_mu: float
    value: float

    KINDS = ("holder", "inf_alpha", "one_minus_alpha_inf", "alpha_one")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise DomainError(f"unknown norm kind {self.kind!r}")
        if not self.value >= 0:
            raise DomainError(f"norm value must be nonnegative, got {self.value}")


def compute_norm(kind: str, obj, exponent: float, **kwargs) -> NormReport:
    """Dispatch helper returning a :class:`NormReport`."""
    if kind == "holder":
        value = holder_seminorm(obj, exponent, kwargs.get("window"))
    elif kind == "inf_alpha":
        value = norm_inf_alpha(obj, exponent, kwargs.get("t", obj.grid.T))
    elif kind == "one_minus_alpha_inf":
        value = norm_one_minus_alpha_inf(obj, exponent, kwargs.get("a"), kwargs.get("b"))
    elif kind == "alpha_one":
        value = norm_alpha_one_values(obj.values, obj.grid.delta, exponent)
    else:
        raise DomainError(f"unknown norm kind {kind!r}")
    return NormReport(kind, exponent, value)
