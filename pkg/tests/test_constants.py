import numpy as np
import pytest

from nopairlab.constants import (C_DAUB, C_HLS, SQRT3_HALF, admissible_region,
                                 boundary_curve, exclusion_constant,
                                 kappa_constants)


def test_kappa_zero_closed_form():
    kc = kappa_constants(0.0)
    assert kc.upsilon == pytest.approx(1.0)
    assert kc.eta == pytest.approx(1.0, abs=1e-14)
    assert kc.d == pytest.approx(1.0, abs=1e-14)
    # max{d Y/(1+d), 1-2k} = max{1/2, 1}
    assert kc.c_lower == pytest.approx(1.0)
    assert kc.upper == pytest.approx(1.0)


def test_special_branch_value():
    kc = kappa_constants(SQRT3_HALF)
    assert kc.eta == pytest.approx(1.0 / (np.sqrt(3.0) * (np.pi - 2.0)), rel=1e-14)


def test_branch_continuity_at_sqrt3_half():
    # the symmetric average of generic-branch evaluations at +-1e-6 removes
    # the linear slope; agreement with the special branch certifies the limit
    left = kappa_constants(SQRT3_HALF - 1e-6).c_lower
    right = kappa_constants(SQRT3_HALF + 1e-6).c_lower
    center = kappa_constants(SQRT3_HALF).c_lower
    assert abs(0.5 * (left + right) - center) < 1e-9
    # inside the special window both sides take the special branch
    assert abs(kappa_constants(SQRT3_HALF - 1e-9).c_lower
               - kappa_constants(SQRT3_HALF + 1e-9).c_lower) < 1e-9


def test_large_kappa_uses_first_branch():
    kc = kappa_constants(0.99)
    assert kc.c_lower > 0.0
    assert kc.c_lower == pytest.approx(kc.d * kc.upsilon / (1.0 + kc.d))
    assert 1.0 - 2.0 * kc.kappa < 0.0


def test_kappa_domain_errors():
    for bad in (-0.1, 1.0, 1.5):
        with pytest.raises(ValueError):
            kappa_constants(bad)


def test_bounds_and_monotonicity_on_grid():
    ks = np.arange(0.0, 1.0, 1e-3)
    vals = np.array([kappa_constants(k).c_lower for k in ks])
    assert np.all(vals > 0.0)
    assert np.all(vals <= 1.0 + 1e-15)
    assert np.all(vals <= 1.0 + 2.0 * ks)
    assert np.all(np.diff(vals) <= 1e-12)  # non-strict decrease


def test_exclusion_constant_reference_values():
    assert C_HLS == pytest.approx((256.0 / (27.0 * np.pi)) ** (1.0 / 3.0))
    assert C_HLS <= 1.45
    assert C_DAUB >= 1.63 / 4.0 ** (1.0 / 3.0) - 1e-15


def test_exclusion_constant_assembly():
    # second branch dominates: 8 * 0.5 * max{0.25 (HLS/D)^3, 8} = 32
    ec = exclusion_constant(0.5, 1.0, 1.0)
    assert 0.25 * (C_HLS / C_DAUB) ** 3 < 3.0
    assert ec.c_ex == pytest.approx(32.0)


def test_exclusion_constant_limits_and_scaling():
    small = exclusion_constant(1e-9, 1.0, 1.0)
    assert small.c_ex == pytest.approx(0.0, abs=1e-6)
    base = exclusion_constant(0.5, 1.0, 1.0)
    doubled = exclusion_constant(0.5, 1.0, 2.0)
    assert doubled.c_ex == pytest.approx(64.0 * base.c_ex)  # ret^6 with branch active


def test_exclusion_constant_monotonicity():
    base = exclusion_constant(0.3, 1.0, 1.0).c_ex
    assert exclusion_constant(0.3, 1.0, 1.2).c_ex >= base
    assert exclusion_constant(0.3, 1.2, 1.0).c_ex <= base


def test_exclusion_constant_domain_errors():
    with pytest.raises(ValueError):
        exclusion_constant(0.5, 0.0, 1.0)
    with pytest.raises(ValueError):
        exclusion_constant(0.5, 1.0, -1.0)
    with pytest.raises(ValueError):
        exclusion_constant(0.0, 1.0, 1.0)


def test_admissible_region_base_cases():
    region, curve = admissible_region([0.5], [0.3, -0.9])
    assert region[0, 0] and region[0, 1]


def test_admissible_region_numeric_cell():
    # (0.1, 0.6): admissible iff 0.6 < 0.1 + 2 C_{0.6}/pi
    region, _ = admissible_region([0.1], [0.6])
    c6 = kappa_constants(0.6).c_lower
    assert region[0, 0] == (0.6 < 0.1 + 2.0 * c6 / np.pi)
    # golden after first computation: 0.1 + 2 C_{0.6}/pi = 0.2296 < 0.6
    assert not region[0, 0]


def test_admissible_region_errors():
    with pytest.raises(ValueError):
        admissible_region([], [0.1])
    with pytest.raises(ValueError):
        admissible_region([0.5], [1.2])


def test_boundary_curve_monotone_and_below_diagonal():
    kp = np.linspace(1e-3, 1.0 - 1e-3, 500)
    curve = boundary_curve(kp)
    assert np.all(np.diff(curve[:, 0]) > 0)
    assert np.all(curve[:, 0] < curve[:, 1])  # kappa' > kappa on the curve


def test_base_region_subset_of_computed():
    kg = np.linspace(1e-3, 1.0 - 1e-3, 60)
    kpg = np.linspace(-1.0 + 1e-3, 1.0 - 1e-3, 60)
    region, _ = admissible_region(kg, kpg)
    base = kpg[None, :] <= kg[:, None]
    assert np.all(region[base])
