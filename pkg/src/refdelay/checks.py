"""Invariant suites behind the ``check`` command.

Each suite returns a :class:`SuiteResult`; a failing suite names the
invariant that broke in ``failed``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import skorokhod
from .errors import GenerationError, NumericError
from .fbm import fbm_cholesky, fbm_circulant, make_driver
from .paths import Grid, GridPath, InitialCondition
from .scheme import euler_run, make_preset
from .stieltjes import Integrand, integral_bound_check


@dataclass
class SuiteResult:
    name: str
    failed: list = field(default_factory=list)
    detail: str = ""

    @property
    def ok(self) -> bool:
        return not self.failed


def _random_walk(rng, grid, start=None):
    steps = rng.normal(scale=rng.uniform(0.05, 1.0), size=grid.size)
    f0 = abs(rng.normal()) if start is None else start
    vals = np.concatenate(([f0], f0 + np.cumsum(steps)))
    return GridPath(grid, vals, InitialCondition.constant(f0, grid.T))


def suite_reflection(cfg, trials: int = 50) -> SuiteResult:
    """Skorokhod conditions on random inputs and the closed form on ``f(t) = -t``."""
    res = SuiteResult("reflection")
    rng = np.random.default_rng(cfg.seed)
    grid = Grid(1.0, 10)
    ramp = GridPath(grid, -grid.points, InitialCondition.constant(0.0, 1.0))
    out = skorokhod.reflect(ramp)
    if np.max(np.abs(out.regulator.values - grid.points)) > 1e-15 or np.max(np.abs(out.reflected.values)) > 1e-15:
        res.failed.append("closed form on f(t) = -t")
    for _ in range(trials):
        f = _random_walk(rng, grid)
        out = skorokhod.reflect(f)
        l = out.regulator.values
        if np.any(np.diff(l) < 0):
            res.failed.append("regulator monotone")
            break
        if l[0] != 0.0:
            res.failed.append("regulator starts at zero")
            break
        if skorokhod.complementarity_defect(out) > skorokhod.TOL_NUM:
            res.failed.append("complementarity")
            break
    res.detail = f"{trials} random inputs"
    return res


def suite_positivity(cfg, seeds: int = 5) -> SuiteResult:
    """Reflected outputs are nonnegative, both for the bare map and for scheme runs."""
    res = SuiteResult("positivity")
    rng = np.random.default_rng(cfg.seed + 1)
    grid = Grid(1.0, 8)
    for _ in range(50):
        out = skorokhod.reflect(_random_walk(rng, grid))
        if np.any(out.reflected.values < -skorokhod.TOL_NUM):
            res.failed.append("positivity of reflect")
            break
    level = min(cfg.level, 10)
    for preset in ("linear", "nonlinear"):
        coeffs, eta = make_preset(preset, cfg.r, cfg.a, cfg.b0)
        for k in range(seeds):
            drv = fbm_circulant(cfg.H, Grid(cfg.T, level), cfg.seed + k)
            run = euler_run(coeffs, eta, drv, level)
            if np.any(run.x.values < 0):
                res.failed.append(f"positivity of {preset} scheme (seed {cfg.seed + k})")
                break
            if np.any(np.diff(run.l.values) < 0) or run.l.values[0] != 0.0:
                res.failed.append(f"regulator laws of {preset} scheme (seed {cfg.seed + k})")
                break
    res.detail = f"{seeds} seeds per preset at level {level}"
    return res


def suite_oscillation(cfg, trials: int = 200) -> SuiteResult:
    res = SuiteResult("oscillation")
    rng = np.random.default_rng(cfg.seed + 2)
    grid = Grid(1.0, 7)
    bad = 0
    for _ in range(trials):
        f = _random_walk(rng, grid)
        s, t = np.sort(rng.uniform(0, 1, size=2))
        if not skorokhod.oscillation_bound_holds(f, float(s), float(t)).holds:
            bad += 1
    if bad:
        res.failed.append(f"oscillation bound ({bad} violations)")
    res.detail = f"{trials} random inputs"
    return res


def suite_integral_bound(cfg, trials: int = 10) -> SuiteResult:
    res = SuiteResult("integral_bound")
    rng = np.random.default_rng(cfg.seed + 3)
    grid = Grid(1.0, 8)
    bad = 0
    for _ in range(trials):
        c1, w1, c2, w2 = rng.uniform(0.2, 3.0, size=4)
        f = Integrand.holder(lambda t, c=c1, w=w1: c * np.sin(w * t + 0.3), 1.0)
        g = make_driver("sinusoid", grid, a=float(c2), omega=float(w2))
        if not integral_bound_check(f, g, cfg.alpha, refine=cfg.refine).holds:
            bad += 1
    if bad:
        res.failed.append(f"integral bound ({bad} violations)")
    res.detail = f"{trials} smooth pairs"
    return res


def suite_fbm_covariance(cfg, samples: int = 2000) -> SuiteResult:
    """Sample ``Var(B_T)`` and ``Cov(B_{T/2}, B_T)`` within 4 standard errors."""
    res = SuiteResult("fbm_covariance")
    grid = Grid(cfg.T, 4)
    H = cfg.H
    ends = np.empty((samples, 2))
    for k in range(samples):
        v = fbm_cholesky(H, grid, cfg.seed * 100003 + k).values
        ends[k] = v[grid.size // 2], v[-1]
    var_t = cfg.T ** (2 * H)
    cov = 0.5 * ((cfg.T / 2) ** (2 * H) + var_t - (cfg.T / 2) ** (2 * H))
    prod = ends[:, 0] * ends[:, 1]
    sq = ends[:, 1] ** 2
    if abs(sq.mean() - var_t) > 4 * sq.std(ddof=1) / np.sqrt(samples):
        res.failed.append("fBm variance")
    if abs(prod.mean() - cov) > 4 * prod.std(ddof=1) / np.sqrt(samples):
        res.failed.append("fBm covariance")
    res.detail = f"{samples} Cholesky samples"
    return res


SUITES = (
    suite_reflection,
    suite_positivity,
    suite_oscillation,
    suite_integral_bound,
    suite_fbm_covariance,
)


def run_all(cfg) -> list[SuiteResult]:
    out = []
    for suite in SUITES:
        name = suite.__name__.removeprefix("suite_")
        try:
            out.append(suite(cfg))
        except (NumericError, GenerationError) as exc:
            out.append(SuiteResult(name, [f"{name} raised {type(exc).__name__}: {exc}"]))
    return out
