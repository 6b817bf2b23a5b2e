import math

import numpy as np
import pytest

from heatshift import (
    GridSpec,
    compute_moment_table,
    error_component_coefficients,
    expected_exponent,
    fit_decay,
    lp_error_norm,
    sphere_projected_component_check,
)
from heatshift.analysis import EXPONENT_VARIANTS
from heatshift.kernels import gaussian_lp_norm, heat_kernel_derivative_field
from heatshift.shifts import derive_shift_set, with_zero_time_shifts

from conftest import DECAY_TIMES


GAUSSIAN_FIELD = heat_kernel_derivative_field((0, 0), 0)


def test_lp_norm_kernel_mass():
    grid = GridSpec(half_width=10.0, points_per_axis=161, p=1.0)
    assert lp_error_norm(GAUSSIAN_FIELD, 2.0, grid, 2) == pytest.approx(1.0, abs=1e-8)


def test_lp_norm_sup_is_peak():
    grid = GridSpec(half_width=8.0, points_per_axis=129, p=math.inf)
    for t in (0.5, 4.0):
        assert lp_error_norm(GAUSSIAN_FIELD, t, grid, 2) == pytest.approx(
            (4.0 * math.pi * t) ** (-1.0), abs=1e-12
        )


def test_lp_norm_l2_closed_form():
    grid = GridSpec(half_width=10.0, points_per_axis=161, p=2.0)
    for t in (1.0, 8.0):
        assert lp_error_norm(GAUSSIAN_FIELD, t, grid, 2) == pytest.approx(
            (8.0 * math.pi * t) ** (-0.5), abs=1e-8
        )


@pytest.mark.parametrize("p", [1.0, 2.0, math.inf])
@pytest.mark.parametrize("t", [1.0, 32.0, 1024.0])
def test_lp_norm_tracks_spreading(p, t):
    # the scaled grid keeps the relative quadrature error t-independent
    grid = GridSpec(half_width=10.0, points_per_axis=161, p=p)
    numeric = lp_error_norm(GAUSSIAN_FIELD, t, grid, 2)
    closed = gaussian_lp_norm(t, 2, p)
    assert abs(numeric - closed) / closed <= 1e-7


def test_lp_norm_reports_nonfinite():
    def bad(points, t):
        vals = np.zeros(len(points))
        vals[7] = np.inf
        return vals

    grid = GridSpec(half_width=2.0, points_per_axis=5, p=2.0)
    with pytest.raises(ValueError, match="non-finite"):
        lp_error_norm(bad, 1.0, grid, 2)


def test_lp_norm_requires_positive_time():
    grid = GridSpec()
    with pytest.raises(ValueError):
        lp_error_norm(GAUSSIAN_FIELD, 0.0, grid, 2)


def test_grid_spec_validation():
    with pytest.raises(ValueError):
        GridSpec(half_width=0.0)
    with pytest.raises(ValueError):
        GridSpec(points_per_axis=128)
    with pytest.raises(ValueError):
        GridSpec(p=0.5)


def test_component_coefficients_vanish(appd_table, appd_shifts, appe_table, appe_shifts):
    for table, shifts in [(appd_table, appd_shifts), (appe_table, appe_shifts)]:
        maxima = error_component_coefficients(table, shifts)
        assert max(maxima) <= 1e-10


def test_component_coefficient_with_forced_zero_time_shift(appd_table, appd_shifts):
    forced = with_zero_time_shifts(appd_shifts)
    maxima = error_component_coefficients(appd_table, forced)
    # dropping the time shift leaves exactly the isotropy constant behind
    assert maxima.diagonal_second == pytest.approx(math.pi / 8.0, abs=1e-10)
    assert maxima.first_order <= 1e-10
    assert maxima.mixed_second <= 1e-10


def test_sphere_projected_even_order(radial_bump_n2):
    table = compute_moment_table(radial_bump_n2, 2)
    shifts = derive_shift_set(table, 0)
    arbitrary = {(0, 0): (0.7, -0.3)}
    residual = sphere_projected_component_check(
        table, shifts, t=1.5, r=1.2, x_star=arbitrary
    )
    assert residual <= 1e-10


def test_sphere_projected_odd_order(appe_table, appe_shifts):
    residual = sphere_projected_component_check(
        appe_table, appe_shifts, t=1.0, r=0.9, t_star={(1, 0): 0.3}
    )
    assert residual <= 1e-10


def test_sphere_projected_zero_component(gaussian_n2):
    # a centred Gaussian has exactly vanishing first-order coefficients
    table = compute_moment_table(gaussian_n2, 2)
    shifts = derive_shift_set(table, 0)
    assert sphere_projected_component_check(table, shifts, t=1.0, r=1.0) == 0.0


def test_fit_decay_pure_power_law():
    times = [1.0, 2.0, 4.0, 8.0, 16.0]
    fit = fit_decay(times, [t**-2 for t in times])
    assert fit.slope == pytest.approx(-2.0, abs=1e-13)
    assert fit.r_squared == pytest.approx(1.0, abs=1e-12)


def test_fit_decay_prefactor():
    times = [2.0, 5.0, 11.0, 23.0]
    fit = fit_decay(times, [5.0 * t**-1.5 for t in times])
    assert fit.slope == pytest.approx(-1.5, abs=1e-12)
    assert fit.intercept == pytest.approx(math.log(5.0), abs=1e-12)


def test_fit_decay_validation():
    with pytest.raises(ValueError):
        fit_decay([1.0, 2.0], [1.0, 0.5])
    with pytest.raises(ValueError):
        fit_decay([1.0, 2.0, 2.0], [1.0, 0.5, 0.2])
    with pytest.raises(ValueError):
        fit_decay([1.0, 2.0, 4.0], [1.0, -0.5, 0.2])
    with pytest.raises(ValueError):
        fit_decay([1.0, 2.0, 4.0], [1.0, 0.5])


def test_expected_exponent_golden():
    assert expected_exponent(0, 2, 2.0, "base") == 1.5
    assert expected_exponent(0, 2, math.inf, "improved") == 2.5
    assert expected_exponent(1, 2, 1.0, "no_time_shift") == 1.0
    assert expected_exponent(0, 2, 2.0, "sphere") == 2.0
    assert expected_exponent(1, 2, 2.0, "sphere") == 2.0
    assert expected_exponent(0, 3, 1.0, "base") == 1.0
    assert expected_exponent(2, 2, 4.0, "base") == 2.0 + 0.75


def test_expected_exponent_validation():
    with pytest.raises(ValueError):
        expected_exponent(0, 2, 0.5, "base")
    with pytest.raises(ValueError, match="variant"):
        expected_exponent(0, 2, 2.0, "bogus")
    assert set(EXPONENT_VARIANTS) == {"base", "improved", "sphere", "no_time_shift"}


def test_profile_ordering_at_late_time(appd_decay):
    idx = DECAY_TIMES.index(256.0)
    full = appd_decay[(2.0, "full_shift")][idx]
    no_time = appd_decay[(2.0, "no_time_shift")][idx]
    no_shift = appd_decay[(2.0, "no_shift")][idx]
    assert full < no_time < no_shift


def test_measured_slope_meets_bound(appd_decay):
    fit = fit_decay(DECAY_TIMES, appd_decay[(2.0, "full_shift")])
    assert fit.slope <= -expected_exponent(0, 2, 2.0, "improved") + 0.2
    assert fit.r_squared >= 0.99
