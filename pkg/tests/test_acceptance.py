"""Acceptance suite: every exit criterion at its stated tolerance.

Each test prints one PASS/FAIL line (run with ``pytest -s`` to see them all).
Golden values come from closed-form moment computations; slope checks are
one-sided because steeper decay than guaranteed is compliant.
"""

import math

import numpy as np
import pytest

from heatshift import (
    GridSpec,
    as_sampled,
    build_modified_kernel,
    compute_moment_table,
    error_component_coefficients,
    expected_exponent,
    fit_decay,
    heat_kernel_derivative,
    lp_error_norm,
    moment_quadrature_oracle,
    sphere_monomial_integral,
    verify_shift_identities,
)
from heatshift.cli import main
from heatshift.kernels import heat_kernel_derivative_field
from heatshift.multiindex import enumerate_order
from heatshift.shifts import derive_shift_set, shift_identity_scale, with_zero_time_shifts
from heatshift.solution import datum_field

from conftest import DECAY_TIMES, degenerate_datum, product_datum


def check(label, ok):
    print(f"{'PASS' if ok else 'FAIL'}: {label}")
    assert ok, label


def test_criterion_01_sphere_surface_measure():
    worst = 0.0
    for n in range(2, 7):
        expected = 2.0 * math.pi ** (n / 2) / math.gamma(n / 2)
        worst = max(worst, abs(sphere_monomial_integral((0,) * n, n) - expected))
    worst = max(worst, abs(sphere_monomial_integral((0, 0, 0), 3) - 4.0 * math.pi))
    check(f"sphere surface measure, n=2..6 (max abs err {worst:.2e} <= 1e-12)", worst <= 1e-12)


def test_criterion_02_moment_oracle_agreement():
    worst = 0.0
    for n in (2, 3):
        for make in (product_datum, degenerate_datum):
            f = make(n=n)
            table = compute_moment_table(f, 5)
            sampled = as_sampled(f, radius=8.0, nodes_per_axis=64)
            for k in range(6):
                for alpha in enumerate_order(n, k):
                    numeric = moment_quadrature_oracle(sampled, alpha)
                    analytic = table[alpha]
                    worst = max(worst, abs(analytic - numeric) / (1.0 + abs(analytic)))
    check(f"moment oracle agreement, |alpha|<=5, n in 2,3 (max rel {worst:.2e} <= 1e-10)",
          worst <= 1e-10)


def test_criterion_03_product_datum_golden_shifts(appd_table):
    shifts = derive_shift_set(appd_table, 0)
    report = shifts.report
    ok = (
        shifts.indices == ((0, 0),)
        and max(abs(shifts.x_star[(0, 0)][i] - 0.5) for i in range(2)) <= 1e-10
        and abs(shifts.t_star[(0, 0)] + 0.125) <= 1e-10
        and report.holds
        and max(
            report.max_offdiag_residual,
            report.max_diag_spread,
            report.complement_residual,
        )
        <= 1e-10
    )
    check("product datum golden shifts: x*=(1/2,1/2), t*=-1/8, isotropy residuals <= 1e-10", ok)


def test_criterion_04_degenerate_datum_golden_shifts(appe_table):
    shifts = derive_shift_set(appe_table, 1)
    xs = shifts.x_star[(1, 0)]
    # the defining relation x*_i (k+1) M_alpha = M_{alpha+e_i} fixes the first
    # component to -sqrt(2)/2 for the plus-branch coefficients
    ok = (
        shifts.indices == ((1, 0),)
        and abs(xs[0] + math.sqrt(2.0) / 2.0) <= 1e-10
        and abs(xs[1]) <= 1e-10
        and abs(shifts.t_star[(1, 0)]) <= 1e-10
    )
    check("degenerate datum golden shifts: indices={(1,0)}, x*=(-sqrt2/2,0), t*=0", ok)


def test_criterion_05_error_components_vanish(appd_table, appd_shifts, appe_table, appe_shifts):
    worst = max(
        max(error_component_coefficients(appd_table, appd_shifts)),
        max(error_component_coefficients(appe_table, appe_shifts)),
    )
    forced = error_component_coefficients(appd_table, with_zero_time_shifts(appd_shifts))
    ok = worst <= 1e-10 and abs(forced.diagonal_second - math.pi / 8.0) <= 1e-10
    check(
        f"error components vanish (max {worst:.2e}); forced t*=0 leaves pi/8 "
        f"({forced.diagonal_second:.12f})",
        ok,
    )


def test_criterion_06_time_shift_identities(appd_table, appd_shifts, appe_table, appe_shifts):
    res_d = verify_shift_identities(appd_table, appd_shifts)
    res_e = verify_shift_identities(appe_table, appe_shifts)
    worst = max(res_d.zeroth_order, res_d.general, res_e.zeroth_order, res_e.general)
    ok = worst <= 1e-10 and shift_identity_scale(0) == 1.0 and shift_identity_scale(1) == 3.0
    check(f"time-shift identities (max residual {worst:.2e}; s(0)=1, s(1)=3)", ok)


def test_criterion_07_derivative_correctness():
    points = np.array([[0.0, 0.0], [0.7, -1.4], [-2.1, 1.3]])
    t = 1.0
    h = 1e-5
    worst = 0.0
    for total in range(1, 5):
        for alpha in enumerate_order(2, total):
            for m in range(3):
                i = next(ax for ax, a in enumerate(alpha) if a)
                lower = tuple(a - (1 if ax == i else 0) for ax, a in enumerate(alpha))
                step = np.zeros(2)
                step[i] = h
                for x in points:
                    value = heat_kernel_derivative(alpha, m, x, t)
                    fd = (
                        heat_kernel_derivative(lower, m, x + step, t)
                        - heat_kernel_derivative(lower, m, x - step, t)
                    ) / (2.0 * h)
                    worst = max(worst, abs(value - fd) / (abs(fd) + 1e-9))
    for m in (1, 2):
        for x in points:
            value = heat_kernel_derivative((0, 0), m, x, t)
            fd = (
                heat_kernel_derivative((0, 0), m - 1, x, t + h)
                - heat_kernel_derivative((0, 0), m - 1, x, t - h)
            ) / (2.0 * h)
            worst = max(worst, abs(value - fd) / (abs(fd) + 1e-9))

    ratio_worst = 0.0
    for alpha, m, p in [((1, 0), 0, 2.0), ((0, 0), 1, 1.0), ((2, 1), 0, math.inf)]:
        field = heat_kernel_derivative_field(alpha, m)
        grid = GridSpec(half_width=8.0, points_per_axis=129, p=p)
        ratio = lp_error_norm(field, 6.0, grid, 2) / lp_error_norm(field, 1.5, grid, 2)
        exponent = m + sum(alpha) / 2.0 + (1.0 - (0.0 if math.isinf(p) else 1.0 / p))
        ratio_worst = max(ratio_worst, abs(ratio / 4.0 ** (-exponent) - 1.0))
    ok = worst <= 1e-5 and ratio_worst <= 1e-3
    check(
        f"derivative correctness (FD rel {worst:.2e} <= 1e-5; "
        f"norm scaling off by {ratio_worst:.2e} <= 1e-3)",
        ok,
    )


def test_criterion_08_exact_profile_degeneration(gaussian_n2):
    table = compute_moment_table(gaussian_n2, 2)
    shifts = derive_shift_set(table, 0)
    kernel = build_modified_kernel(table, 0, shifts.indices, shifts.x_star, shifts.t_star)
    diff = datum_field(gaussian_n2) - kernel.field()
    grid = GridSpec(half_width=8.0, points_per_axis=129, p=math.inf)
    worst = max(lp_error_norm(diff, t, grid, 2) for t in (1.0, 16.0, 256.0))
    ok = worst <= 1e-10 and abs(shifts.t_star[(0, 0)] + 0.25) <= 1e-12
    check(f"exact profile degeneration: sup error {worst:.2e} <= 1e-10 at t=1,16,256", ok)


def test_criterion_09_first_order_decay_rates(appd_decay):
    idx256 = DECAY_TIMES.index(256.0)
    ok = True
    details = []
    for p in (1.0, 2.0, math.inf):
        fit = fit_decay(DECAY_TIMES, appd_decay[(p, "full_shift")])
        bound = -expected_exponent(0, 2, p, "improved") + 0.2
        ok = ok and fit.slope <= bound and fit.r_squared >= 0.99
        details.append(f"p={p:g}: slope {fit.slope:+.3f} <= {bound:+.3f}, r2 {fit.r_squared:.4f}")
        ordered = (
            appd_decay[(p, "full_shift")][idx256]
            < appd_decay[(p, "no_time_shift")][idx256]
            < appd_decay[(p, "no_shift")][idx256]
        )
        ok = ok and ordered
    check("first-order decay rates and profile ordering at t=256 (" + "; ".join(details) + ")", ok)


def test_criterion_10_higher_order_decay_rate(appe_decay):
    fit = fit_decay(DECAY_TIMES, appe_decay)
    bound = -expected_exponent(1, 2, 2.0, "base") + 0.2
    ok = fit.slope <= bound
    check(f"degenerate-order decay rate: slope {fit.slope:+.3f} <= {bound:+.3f}", ok)


def test_criterion_11_sphere_average_decay_rate(radial_bump_n2, radial_sphere_decay):
    table = compute_moment_table(radial_bump_n2, 2)
    shifts = derive_shift_set(table, 0)
    # the time shift must come out of the derivation: -M_{2e1} / (2 M_0)
    derived = shifts.t_star[(0, 0)]
    reference = -table[(2, 0)] / (2.0 * table[(0, 0)])
    fit = fit_decay(DECAY_TIMES, radial_sphere_decay)
    bound = -expected_exponent(0, 2, 2.0, "sphere") + 0.2
    ok = (
        abs(derived - reference) <= 1e-12
        and abs(derived + 0.375) <= 1e-12
        and fit.slope <= bound
    )
    check(
        f"sphere-average decay rate: slope {fit.slope:+.3f} <= {bound:+.3f}, "
        f"t* computed = {derived:.6f}",
        ok,
    )


def test_criterion_12_cli_determinism(tmp_path):
    config = {
        "n": 2,
        "data": {"type": "hermite_gaussian_sum", "terms": [[[1.0, 1.0], [1.0, 1.0]]]},
        "k": 0,
        "p_values": [1, 2, "inf"],
        "times": {"start": 16.0, "stop": 1024.0, "count": 7},
        "grid": {"half_width": 8.0, "points_per_axis": 129},
        "variants": ["full_shift", "no_time_shift", "no_shift"],
    }
    import json

    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps(config))
    out1, out2 = tmp_path / "run1", tmp_path / "run2"
    code1 = main(["all", "--config", str(cfg), "--out", str(out1)])
    code2 = main(["all", "--config", str(cfg), "--out", str(out2)])
    identical = all(
        (out1 / name).read_bytes() == (out2 / name).read_bytes()
        for name in ("shifts.csv", "identities.csv", "decay.csv")
    )
    ok = code1 == 0 and code2 == 0 and identical
    check("full pipeline reruns produce byte-identical CSVs", ok)
