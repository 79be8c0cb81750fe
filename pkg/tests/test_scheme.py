import math

import numpy as np
import pytest

from refdelay import (
    DomainError,
    Grid,
    InitialCondition,
    NumericError,
    PreconditionError,
    constant_coefficients,
    deterministic_driver,
    euler_run,
    fbm_circulant,
    make_preset,
    reflect,
)
from refdelay.paths import GridPath
from refdelay.scheme import Coefficients, increment_estimate_check, spot_check_constants


def test_nothing_moves():
    eta = InitialCondition.constant(0.7, 0.5)
    res = euler_run(constant_coefficients(0.0, 0.0, 0.5), eta, fbm_circulant(0.7, Grid(1.0, 8), 0), 8)
    assert np.all(res.x.values == 0.7)
    assert np.all(res.l.values == 0.0)


def test_reduces_to_reflection_of_driver():
    drv = fbm_circulant(0.7, Grid(1.0, 10), 4)
    eta = InitialCondition.constant(0.0, 0.5)
    res = euler_run(constant_coefficients(0.0, 1.0, 0.5), eta, drv, 10)
    np.testing.assert_array_equal(res.z.values, drv.values)
    ref = reflect(GridPath(drv.grid, drv.values, eta))
    np.testing.assert_array_equal(res.x.values, ref.reflected.values)
    np.testing.assert_array_equal(res.l.values, ref.regulator.values)


def test_linear_preset_identity_driver_refines_at_first_order():
    coeffs, eta = make_preset("linear", 0.5)
    drv = deterministic_driver("identity", Grid(1.0, 14))
    x14 = euler_run(coeffs, eta, drv, 14).x.values
    levels = [8, 9, 10, 11, 12]
    diffs = [np.max(np.abs(euler_run(coeffs, eta, drv, n).x.values - x14[:: 1 << (14 - n)])) for n in levels]
    slope = -np.polyfit(levels, np.log2(diffs), 1)[0]
    assert slope >= 0.9
    assert diffs[2] <= 5 * Grid(1.0, 10).delta


def test_linear_preset_properties():
    coeffs, eta = make_preset("linear", 0.5)
    assert eta.at_zero == 0.5
    seg = GridPath(Grid(1.0, 2), np.zeros(5), eta).segment(0.0)
    assert coeffs.b(0.0, seg) == 0.0
    flat, _ = make_preset("linear", 0.5, a=0.0, b0=0.0)
    assert flat.sigma(0.3, seg) == 0.0


def test_nonlinear_preset_properties():
    coeffs, eta = make_preset("nonlinear", 0.5)
    assert eta.at_zero == 0.0
    p = GridPath(Grid(1.0, 4), np.linspace(-3, 3, 17), eta)
    for t in np.linspace(0, 1, 9):
        assert abs(coeffs.sigma(t, p.segment(t))) <= 1.0
    assert coeffs.beta == 1.0


@pytest.mark.parametrize("preset", ["linear", "nonlinear"])
def test_declared_constants_hold(preset):
    coeffs, eta = make_preset(preset, 0.5)
    assert spot_check_constants(coeffs, eta, seed=1, trials=100) == []


@pytest.mark.parametrize("preset", ["linear", "nonlinear"])
def test_positivity_on_fbm(preset):
    coeffs, eta = make_preset(preset, 0.5)
    for seed in range(5):
        res = euler_run(coeffs, eta, fbm_circulant(0.6, Grid(1.0, 10), seed), 10)
        assert np.all(res.x.values >= 0)
        assert res.l.values[0] == 0.0
        assert np.all(np.diff(res.l.values) >= 0)
        np.testing.assert_array_equal(res.x.values, res.z.values + res.l.values)


def test_runs_on_coarser_level_of_driver():
    coeffs, eta = make_preset("linear", 0.5)
    drv = fbm_circulant(0.75, Grid(1.0, 10), 1)
    assert euler_run(coeffs, eta, drv, 6).x.values.size == 65
    with pytest.raises(DomainError):
        euler_run(coeffs, eta, drv, 11)


def test_negative_initial_value_rejected():
    coeffs, _ = make_preset("linear", 0.5)
    with pytest.raises(PreconditionError):
        euler_run(coeffs, InitialCondition.constant(-1.0, 0.5), deterministic_driver("identity", Grid(1.0, 4)), 4)


def test_non_finite_coefficient_reports_cell():
    bad = Coefficients(b=lambda t, seg: math.inf if t > 0.5 else 0.0, sigma=lambda t, seg: 0.0)
    with pytest.raises(NumericError) as exc:
        euler_run(bad, InitialCondition.constant(1.0, 0.5), deterministic_driver("identity", Grid(1.0, 3)), 3)
    assert exc.value.cell == 5


def test_increment_check_constant_solution():
    eta = InitialCondition.constant(1.0, 0.5)
    drv = deterministic_driver("identity", Grid(1.0, 8))
    res = euler_run(constant_coefficients(0.0, 0.0, 0.5), eta, drv, 8)
    chk = increment_estimate_check(res, drv, 0.3, 1.0)
    assert chk.lhs_max == 0.0 and chk.ratio == 0.0


def test_increment_check_stable_across_levels():
    # with a Lipschitz driver the bound's exponent min(theta, 1 - alpha) is
    # sharp only as alpha -> 0; alpha = 0.1 leaves a factor 2^(-0.2) per level
    coeffs, eta = make_preset("linear", 0.5)
    drv = deterministic_driver("identity", Grid(1.0, 12))
    ratios = [increment_estimate_check(euler_run(coeffs, eta, drv, n), drv, 0.1, 1.0).ratio for n in (8, 10, 12)]
    assert (max(ratios) - min(ratios)) / min(ratios) < 0.5
    # at larger alpha the ratio only decreases with refinement
    ratios_03 = [increment_estimate_check(euler_run(coeffs, eta, drv, n), drv, 0.3, 1.0).ratio for n in (8, 10, 12)]
    assert ratios_03[0] >= ratios_03[1] >= ratios_03[2]


def test_increment_check_finite_for_fbm():
    coeffs, eta = make_preset("linear", 0.5)
    drv = fbm_circulant(0.75, Grid(1.0, 10), 7)
    chk = increment_estimate_check(euler_run(coeffs, eta, drv, 10), drv, 0.3, 1.0)
    assert chk.ok and math.isfinite(chk.ratio)


def test_unknown_preset():
    with pytest.raises(DomainError):
        make_preset("quadratic", 0.5)


def test_repeat_runs_bit_identical():
    coeffs, eta = make_preset("nonlinear", 0.5)
    drv = fbm_circulant(0.75, Grid(1.0, 9), 2)
    a, b = euler_run(coeffs, eta, drv, 9), euler_run(coeffs, eta, drv, 9)
    np.testing.assert_array_equal(a.x.values, b.x.values)


def test_rejects_rough_initial_function():
    coeffs, _ = make_preset("linear", 0.5)
    eta = InitialCondition(lambda t: np.ones_like(np.asarray(t, dtype=float)), 0.5, theta=0.2)
    with pytest.raises(PreconditionError):
        euler_run(coeffs, eta, fbm_circulant(0.75, Grid(1.0, 6), 0), 6)


def test_scheme_complementarity_defect_vanishes():
    from refdelay import complementarity_defect
    from refdelay.skorokhod import ReflectionResult

    coeffs, eta = make_preset("nonlinear", 0.5)
    drv = fbm_circulant(0.75, Grid(1.0, 12), 3)
    for n in range(6, 13):
        res = euler_run(coeffs, eta, drv, n)
        assert complementarity_defect(ReflectionResult(res.z, res.x, res.l), 0.01) == 0.0


def test_sup_norms_bounded_across_levels():
    from refdelay import sup_norm

    coeffs, eta = make_preset("linear", 0.5)
    drv = fbm_circulant(0.75, Grid(1.0, 12), 5)
    sups = [sup_norm(euler_run(coeffs, eta, drv, n).x) for n in range(6, 13)]
    top = sups[-3:]
    assert (max(top) - min(top)) / min(top) < 0.2
    assert max(sups) < 2 * min(sups)
