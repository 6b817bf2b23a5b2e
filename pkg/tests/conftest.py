import math

import numpy as np
import pytest

from heatshift import (
    GridSpec,
    HermiteGaussianSum,
    TensorTerm,
    build_modified_kernel,
    compute_moment_table,
    lp_error_norm,
)
from heatshift.shifts import (
    derive_shift_set,
    with_zero_spatial_shifts,
    with_zero_time_shifts,
)
from heatshift.solution import (
    datum_field,
    default_sphere_quadrature,
    sphere_average_profile,
)

DECAY_TIMES = tuple(float(t) for t in np.geomspace(16.0, 1024.0, 7))


def product_datum(n=2, ratio=1.0, leading=None):
    "Product datum with axis factors (c0 + c0*ratio*x) exp(-x^2)."
    leading = [1.0] * n if leading is None else list(leading)
    return HermiteGaussianSum(
        (TensorTerm(tuple((c0, c0 * ratio) for c0 in leading)),)
    )


def degenerate_datum(n=2, scale=1.0):
    """Zero-mass datum whose order-1 moments survive only on the first axis.

    Axis 1 carries (1 + sqrt(2) x - 2 x^2) exp(-x^2); the remaining axes
    carry (1 - (2/3) x^2) exp(-x^2).
    """
    first = (scale, scale * math.sqrt(2.0), -2.0 * scale)
    rest = (scale, 0.0, -(2.0 / 3.0) * scale)
    return HermiteGaussianSum((TensorTerm((first,) + (rest,) * (n - 1)),))


@pytest.fixture(scope="session")
def appd_n2():
    return product_datum(n=2, ratio=1.0)


@pytest.fixture(scope="session")
def appe_n2():
    return degenerate_datum(n=2)


@pytest.fixture(scope="session")
def gaussian_n2():
    return HermiteGaussianSum((TensorTerm(((1.0,), (1.0,))),))


@pytest.fixture(scope="session")
def radial_bump_n2():
    "(1 + |x|^2) exp(-|x|^2) in two dimensions, as a sum of three tensor terms."
    return HermiteGaussianSum(
        (
            TensorTerm(((1.0,), (1.0,))),
            TensorTerm(((0.0, 0.0, 1.0), (1.0,))),
            TensorTerm(((1.0,), (0.0, 0.0, 1.0))),
        )
    )


@pytest.fixture(scope="session")
def appd_table(appd_n2):
    return compute_moment_table(appd_n2, 5)


@pytest.fixture(scope="session")
def appe_table(appe_n2):
    return compute_moment_table(appe_n2, 5)


@pytest.fixture(scope="session")
def appd_shifts(appd_table):
    return derive_shift_set(appd_table, 0)


@pytest.fixture(scope="session")
def appe_shifts(appe_table):
    return derive_shift_set(appe_table, 1)


def decay_errors(datum, k, p, variant, times=DECAY_TIMES, sphere=False):
    "Errors of the order-k profile against the exact solution over a time schedule."
    table = compute_moment_table(datum, k + 2)
    shifts = derive_shift_set(table, k)
    if variant == "no_time_shift":
        shifts = with_zero_time_shifts(shifts)
    elif variant == "no_shift":
        shifts = with_zero_time_shifts(with_zero_spatial_shifts(shifts))
    elif variant == "sphere":
        shifts = (
            with_zero_spatial_shifts(shifts) if k % 2 == 0 else with_zero_time_shifts(shifts)
        )
    elif variant != "full_shift":
        raise ValueError(variant)
    kernel = build_modified_kernel(table, k, shifts.indices, shifts.x_star, shifts.t_star)
    diff = datum_field(datum) - kernel.field()
    if sphere:
        quadrature = default_sphere_quadrature(datum.n)
        inner = diff

        def diff(points, t):  # noqa: F811 - sphere-averaged profile of the same field
            radii = np.sqrt((np.asarray(points) ** 2).sum(axis=1))
            return sphere_average_profile(inner, radii, t, quadrature)

    grid = GridSpec(half_width=8.0, points_per_axis=129, p=p)
    return [lp_error_norm(diff, t, grid, datum.n) for t in times]


@pytest.fixture(scope="session")
def appd_decay(appd_n2):
    "Errors for the product datum: {(p, variant): [errors over DECAY_TIMES]}."
    out = {}
    for p in (1.0, 2.0, math.inf):
        for variant in ("full_shift", "no_time_shift", "no_shift"):
            out[(p, variant)] = decay_errors(appd_n2, 0, p, variant)
    return out


@pytest.fixture(scope="session")
def appe_decay(appe_n2):
    return decay_errors(appe_n2, 1, 2.0, "full_shift")


@pytest.fixture(scope="session")
def radial_sphere_decay(radial_bump_n2):
    return decay_errors(radial_bump_n2, 0, 2.0, "sphere", sphere=True)
