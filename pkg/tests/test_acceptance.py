"""Acceptance criteria, one test each.

Every test records a ``PASS``/``FAIL`` line with the measured quantities; the
lines are printed in the terminal summary (see ``conftest.py``) and when the
module is run directly with ``python3 tests/test_acceptance.py``.
"""

import sys
import time
from pathlib import Path

import numpy as np
from scipy import integrate, stats

sys.path.insert(0, str(Path(__file__).parent))

from refdelay import (  # noqa: E402
    DriverPath,
    Grid,
    GridPath,
    InitialCondition,
    Integrand,
    MonteCarloConfig,
    constant_coefficients,
    deterministic_driver,
    estimate_holder_exponent,
    estimate_rate,
    euler_run,
    fbm_cholesky,
    fbm_circulant,
    holder_seminorm,
    integral_bound_check,
    make_preset,
    method_of_steps_oracle,
    monte_carlo_convergence,
    oscillation_bound_holds,
    reflect,
    rs_integral_left,
    sup_norm,
    zahle_integral,
)
from refdelay.convergence import cauchy_diffs, count_inversions  # noqa: E402

RESULTS = []


def record(number, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
    RESULTS.append(line)
    print(line)
    assert ok, line


def test_criterion_01_reflection_exactness():
    g = Grid(1.0, 10)
    f = GridPath(g, -g.points, InitialCondition.constant(0.0, 1.0))
    times = []
    for _ in range(5):
        t0 = time.perf_counter()
        res = reflect(f)
        times.append(time.perf_counter() - t0)
    err_l = float(np.max(np.abs(res.regulator.values - g.points)))
    err_g = float(np.max(np.abs(res.reflected.values)))
    best = min(times)
    ok = err_l <= 1e-15 and err_g <= 1e-15 and best < 1e-3
    record(1, ok, f"max|l-t|={err_l:.1e}, max|g|={err_g:.1e}, best of 5 runs {best * 1e3:.3f} ms")


def test_criterion_02_oscillation_bound():
    rng = np.random.default_rng(2)
    t0 = time.perf_counter()
    bad = 0
    worst = -np.inf
    for _ in range(1000):
        g = Grid(1.0, int(rng.integers(3, 9)))
        steps = rng.normal(scale=rng.uniform(0.05, 1.0), size=g.size)
        v0 = abs(rng.normal())
        v = np.concatenate(([v0], v0 + np.cumsum(steps)))
        f = GridPath(g, v, InitialCondition.constant(v0, 1.0))
        s, t = np.sort(rng.uniform(0, 1, 2))
        chk = oscillation_bound_holds(f, float(s), float(t))
        bad += not chk.holds
        worst = max(worst, chk.lhs - chk.rhs)
    dt = time.perf_counter() - t0
    record(2, bad == 0 and dt < 5, f"{bad} violations in 1000 inputs, max(lhs-rhs)={worst:.2e}, {dt:.2f} s")


def test_criterion_03_positivity_and_regulator():
    t0 = time.perf_counter()
    runs = bad = 0
    for preset in ("linear", "nonlinear"):
        coeffs, eta = make_preset(preset, 0.5)
        for H in (0.6, 0.75, 0.9):
            for seed in range(50):
                res = euler_run(coeffs, eta, fbm_circulant(H, Grid(1.0, 10), seed), 10)
                x, l = res.x.values, res.l.values
                runs += 1
                bad += not (np.all(x >= 0) and np.all(np.diff(l) >= 0) and l[0] == 0.0)
    dt = time.perf_counter() - t0
    record(3, bad == 0 and dt < 60, f"{runs - bad}/{runs} runs satisfy x>=0, l nondecreasing, l(0)=0; {dt:.1f} s")


def test_criterion_04_reduction_identity():
    rng = np.random.default_rng(4)
    same = 0
    for k in range(20):
        c = float(rng.uniform(0, 2))
        eta = InitialCondition.constant(c, 0.5)
        drv = fbm_circulant(float(rng.uniform(0.55, 0.95)), Grid(1.0, 10), 1000 + k)
        x = euler_run(constant_coefficients(0.0, 1.0, 0.5), eta, drv, 10).x.values
        ref = reflect(GridPath(drv.grid, drv.values + c, eta)).reflected.values
        same += np.array_equal(x, ref)
    record(4, same == 20, f"{same}/20 drivers bit-identical to reflect(g + eta(0))")


def test_criterion_05_fbm_law():
    t0 = time.perf_counter()
    g6 = Grid(1.0, 6)
    S = np.array([fbm_cholesky(0.75, g6, k).values for k in range(10_000)])
    b1, bh = S[:, -1], S[:, 32]
    var, se_var = np.mean(b1**2), np.std(b1**2, ddof=1) / 100
    cov, se_cov = np.mean(bh * b1), np.std(bh * b1, ddof=1) / 100
    g8 = Grid(1.0, 8)
    chol = np.array([fbm_cholesky(0.75, g8, k).values[-1] for k in range(10_000)])
    circ = np.array([fbm_circulant(0.75, g8, 1_000_000 + k).values[-1] for k in range(10_000)])
    ks = stats.ks_2samp(chol, circ).statistic
    crit = 1.628 * np.sqrt(2 / 10_000)
    dt = time.perf_counter() - t0
    ok = abs(var - 1) < 3 * se_var and abs(cov - 0.5) < 3 * se_cov and ks < crit and dt < 60
    record(
        5,
        ok,
        f"Var(B_1)={var:.4f} ({abs(var - 1) / se_var:.2f} SE), Cov={cov:.4f} ({abs(cov - 0.5) / se_cov:.2f} SE), "
        f"KS={ks:.4f} < {crit:.4f}; {dt:.1f} s",
    )


def test_criterion_06_integral_cross_check():
    t0 = time.perf_counter()
    g = Grid(1.0, 12)
    sq = DriverPath(g, g.points**2)
    ref = integrate.quad(lambda t: np.sin(t) * 2 * t, 0, 1, epsabs=1e-14)[0]
    z = zahle_integral(Integrand.holder(np.sin, 1.0), sq, 0.3)
    rel_smooth = abs(z - ref) / abs(ref)

    drv = fbm_circulant(0.75, g, 6)
    coeffs, eta = make_preset("linear", 0.5)
    run = euler_run(coeffs, eta, drv, 12)
    cases = {
        "scheme diffusion cells": np.array([coeffs.sigma(t, run.x.segment(t)) for t in g.points[:-1]]),
        "frozen cos cells": np.cos(5 * g.points[:-1]),
    }
    rel_step = {}
    for name, cells in cases.items():
        f = Integrand.piecewise_constant(cells, g)
        for drv_name, d in (("fBm", drv), ("t^2", sq)):
            rs = rs_integral_left(f, d)
            rel_step[f"{name}/{drv_name}"] = abs(zahle_integral(f, d, 0.3, refine=16) - rs) / abs(rs)
    worst = max(rel_step.values())
    dt = time.perf_counter() - t0
    ok = rel_smooth <= 1e-3 and worst <= 1e-2 and dt < 10
    record(6, ok, f"smooth rel err {rel_smooth:.1e}; step-integrand worst rel err {worst:.1e}; {dt:.2f} s")


def test_criterion_07_integral_bound():
    rng = np.random.default_rng(7)
    g = Grid(1.0, 8)
    bad = 0
    tight = 0.0
    for _ in range(100):
        c = rng.normal(size=3)
        w = rng.uniform(0.5, 6.0, size=3)
        f = Integrand.holder(lambda t, c=c, w=w: c[0] + c[1] * np.sin(w[0] * t) + c[2] * np.cos(w[1] * t) * t, 1.0)
        if rng.random() < 0.5:
            d = deterministic_driver("sinusoid", g, a=float(rng.uniform(0.1, 3)), omega=float(w[2]))
        else:
            k = rng.normal(size=3)
            d = DriverPath(g, k[0] * g.points + k[1] * g.points**2 + k[2] * g.points**3)
        alpha = float(rng.uniform(0.05, 0.45))
        chk = integral_bound_check(f, d, alpha)
        bad += not chk.holds
        if chk.rhs > 0:
            tight = max(tight, chk.lhs / chk.rhs)
    record(7, bad == 0, f"{bad} violations in 100 pairs, largest lhs/rhs = {tight:.3f}")


def test_criterion_08_smooth_driver_oracle():
    t0 = time.perf_counter()
    r, T = 0.5, 1.0
    coeffs, eta = make_preset("linear", r)
    drv = deterministic_driver("identity", Grid(T, 14))
    oracle = method_of_steps_oracle(coeffs, eta, drv, 14).values
    x12 = euler_run(coeffs, eta, drv, 12).x.values
    err = float(np.max(np.abs(x12 - oracle[::4])))
    bound = 5 * 2.0**-12 * T
    diffs = cauchy_diffs(coeffs, eta, drv.coarsen(12), 8, 12)
    rate = estimate_rate(diffs, range(8, 12)).rate
    dt = time.perf_counter() - t0
    ok = err <= bound and rate >= 0.9 and dt < 30
    record(8, ok, f"sup|x^12 - oracle^14| = {err:.2e} <= {bound:.2e}; self-refinement order {rate:.3f}; {dt:.2f} s")


def test_criterion_09_cauchy_behaviour():
    t0 = time.perf_counter()
    rep = monte_carlo_convergence(MonteCarloConfig(preset="linear", H=0.75, seeds=200, n_min=4, n_max=9))
    dt = time.perf_counter() - t0
    inv = np.array([count_inversions(rep.diffs[s]) for s in rep.diffs])
    frac = float(np.mean(inv <= 1))
    med = np.array([s["median"] for s in rep.per_level_stats()])
    partial = np.cumsum(med)
    growth = (partial[-1] - partial[-2]) / partial[-2]
    ok = frac >= 0.95 and rep.median_rate >= 0.2 and growth < 0.05 and dt < 120
    record(
        9,
        ok,
        f"{frac:.1%} of seeds with <=1 inversion; median rate {rep.median_rate:.3f}; "
        f"last partial-sum increment {growth:.1%} (per-level median D_n); {dt:.1f} s",
    )


def test_criterion_10_regularity():
    t0 = time.perf_counter()
    parts = []
    ok = True
    for preset in ("linear", "nonlinear"):
        coeffs, eta = make_preset(preset, 0.5)
        target = min(eta.theta, 0.5) - 0.1
        est = np.array(
            [
                estimate_holder_exponent(euler_run(coeffs, eta, fbm_circulant(0.75, Grid(1.0, 12), s), 12).x).exponent
                for s in range(100)
            ]
        )
        frac = float(np.mean(est >= target))
        ok &= frac >= 0.9
        parts.append(f"{preset}: {frac:.0%} >= {target:.1f} (min {est.min():.3f})")
    dt = time.perf_counter() - t0
    ok &= dt < 120
    record(10, ok, "; ".join(parts) + f"; {dt:.1f} s")


def test_criterion_11_uniform_bounds():
    coeffs, eta = make_preset("linear", 0.5)
    mu = min(eta.theta, 0.5) - 0.05
    drv = fbm_circulant(0.75, Grid(1.0, 12), 11)
    sups, hols = [], []
    for n in (10, 11, 12):
        x = euler_run(coeffs, eta, drv, n).x
        sups.append(sup_norm(x))
        hols.append(holder_seminorm(x, mu))
    spread = lambda v: (max(v) - min(v)) / min(v)
    ok = spread(sups) < 0.2 and spread(hols) < 0.5
    record(11, ok, f"sup-norm spread {spread(sups):.2%}, {mu:.2f}-Hölder seminorm spread {spread(hols):.2%}")


if __name__ == "__main__":
    failed = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                fn()
            except AssertionError:
                failed += 1
    sys.exit(1 if failed else 0)
