"""Fractional Brownian motion drivers (H > 1/2) and deterministic driver presets."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import DomainError, GenerationError
from .paths import Grid

log = logging.getLogger(__name__)

CHOLESKY_MAX_LEVEL = 12
CIRCULANT_MAX_LEVEL = 20
#: Negative circulant eigenvalues above this are rounding noise and clamped to 0.
EIGEN_TOL = 1e-9
CHOLESKY_JITTER = 1e-12


@dataclass(frozen=True)
class DriverPath:
    """Integrator samples ``g(t_i)`` on the finest grid in use."""

    grid: Grid
    values: np.ndarray
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.values.shape != (self.grid.size + 1,):
            raise DomainError("driver values do not match the grid")

    @property
    def level(self) -> int:
        return self.grid.n

    def coarsen(self, n: int) -> "DriverPath":
        """Restriction to level ``n``: every ``2**(N - n)``-th sample, no resampling."""
        grid = self.grid.coarsen(n)
        step = 1 << (self.grid.n - n)
        vals = self.values[::step]
        return DriverPath(grid, vals, {**self.meta, "n": n})

    def eval(self, t):
        return np.interp(t, self.grid.points, self.values)


def rng_for(seed: int) -> np.random.Generator:
    """Generator keyed only by ``seed`` so replicas are order independent."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed))))


def fbm_covariance(H: float, s, t):
    """``R(s,t) = (s^2H + t^2H - |t-s|^2H) / 2``."""
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    two_h = 2.0 * H
    return 0.5 * (np.abs(s) ** two_h + np.abs(t) ** two_h - np.abs(t - s) ** two_h)


def fgn_autocovariance(H: float, k):
    """Unit-spacing fractional Gaussian noise autocovariance."""
    k = np.abs(np.asarray(k, dtype=float))
    two_h = 2.0 * H
    return 0.5 * ((k + 1) ** two_h - 2 * k**two_h + np.abs(k - 1) ** two_h)


def _check_hurst(H):
    if not 0.5 < H < 1.0:
        raise DomainError(f"Hurst parameter must lie in (1/2, 1), got {H}")


@lru_cache(maxsize=16)
def _cholesky_factor(H: float, T: float, n: int) -> np.ndarray:
    t = Grid(T, n).points[1:]
    cov = fbm_covariance(H, t[:, None], t[None, :])
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        pass
    try:
        return np.linalg.cholesky(cov + CHOLESKY_JITTER * np.eye(t.size))
    except np.linalg.LinAlgError as exc:
        raise GenerationError(
            f"fBm covariance not positive definite (H={H}, n={n}) even after jitter"
        ) from exc


def fbm_cholesky(H: float, grid: Grid, seed: int) -> DriverPath:
    """Exact fBm sample at the grid points via the Cholesky factor of ``R``."""
    _check_hurst(H)
    if grid.n > CHOLESKY_MAX_LEVEL:
        raise DomainError(f"Cholesky sampler limited to level {CHOLESKY_MAX_LEVEL}")
    L = _cholesky_factor(H, grid.T, grid.n)
    z = rng_for(seed).standard_normal(grid.size)
    vals = np.concatenate(([0.0], L @ z))
    return DriverPath(grid, vals, {"kind": "fbm_cholesky", "H": H, "seed": int(seed), "n": grid.n})


@lru_cache(maxsize=16)
def _circulant_sqrt_eigs(H: float, n: int) -> np.ndarray:
    N = 1 << n
    gam = fgn_autocovariance(H, np.arange(N + 1))
    row = np.concatenate((gam, gam[-2:0:-1]))
    lam = np.fft.fft(row).real
    low = lam.min()
    if low < -EIGEN_TOL:
        raise GenerationError(
            f"circulant embedding has negative eigenvalue {low:.3e} (H={H}, n={n})"
        )
    if low < 0:
        log.warning("clamping circulant eigenvalue %.3e to zero (H=%s, n=%d)", low, H, n)
        lam = np.maximum(lam, 0.0)
    return np.sqrt(lam / row.size)


def fbm_circulant(H: float, grid: Grid, seed: int) -> DriverPath:
    """Exact fBm sample from circulant embedding of the increment covariance."""
    _check_hurst(H)
    if grid.n > CIRCULANT_MAX_LEVEL:
        raise DomainError(f"circulant sampler limited to level {CIRCULANT_MAX_LEVEL}")
    root = _circulant_sqrt_eigs(H, grid.n)
    rng = rng_for(seed)
    M = root.size
    w = root * (rng.standard_normal(M) + 1j * rng.standard_normal(M))
    noise = np.fft.fft(w).real[: grid.size]
    noise *= grid.delta**H
    vals = np.concatenate(([0.0], np.cumsum(noise)))
    return DriverPath(grid, vals, {"kind": "fbm_circulant", "H": H, "seed": int(seed), "n": grid.n})


def deterministic_driver(kind: str, grid: Grid, **params) -> DriverPath:
    """Smooth drivers: ``identity`` (t), ``power`` (t**gamma), ``sinusoid`` (a sin(omega t))."""
    t = grid.points
    if kind == "identity":
        vals = t.copy()
    elif kind == "power":
        g = params.get("gamma", 1.0)
        if not 0.5 < g <= 1.0:
            raise DomainError(f"power driver needs gamma in (1/2, 1], got {g}")
        vals = t**g
    elif kind == "sinusoid":
        a = params.get("a", 1.0)
        omega = params.get("omega", 2 * math.pi)
        vals = a * np.sin(omega * t)
    else:
        raise DomainError(f"unknown driver kind {kind!r}")
    meta = {"kind": "deterministic", "driver": kind, "H": None, "seed": None, "n": grid.n, **params}
    return DriverPath(grid, np.asarray(vals, dtype=float), meta)


def make_driver(kind: str, grid: Grid, H: float | None = None, seed: int = 0, **params) -> DriverPath:
    """Dispatch by name: ``fbm`` (circulant), ``fbm_cholesky``, or a deterministic kind."""
    if kind in ("fbm", "fbm_circulant"):
        return fbm_circulant(H, grid, seed)
    if kind == "fbm_cholesky":
        return fbm_cholesky(H, grid, seed)
    return deterministic_driver(kind, grid, **params)
