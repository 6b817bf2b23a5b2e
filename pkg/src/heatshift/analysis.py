"""Error norms on self-similar grids, vanishing-coefficient diagnostics, decay fits.

Norms are computed on the grid x = sqrt(t) * z with z in a fixed box: the
error fields concentrate on the sqrt(t) scale, so a fixed box in z keeps the
relative quadrature error essentially independent of t (the truncation tail
is documented, not proven).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .gaussians import GaussianTermSum
from .initialdata import MomentTable
from .multiindex import add, enumerate_order, multi_factorial, unit
from .shifts import ShiftSet
from .solution import SphereQuadrature, default_sphere_quadrature, sphere_average


@dataclass(frozen=True)
class GridSpec:
    """Norm evaluation grid in the self-similar variable z = x / sqrt(t).

    ``points_per_axis`` must be odd so the origin lies on the grid (the sup
    norm of kernel-like fields peaks there).
    """

    half_width: float = 8.0
    points_per_axis: int = 129
    p: float = 2.0

    def __post_init__(self):
        if self.half_width <= 0:
            raise ValueError("half_width must be positive")
        if self.points_per_axis < 3 or self.points_per_axis % 2 == 0:
            raise ValueError("points_per_axis must be odd and >= 3")
        if not (self.p >= 1):
            raise ValueError(f"norm index must satisfy p >= 1, got {self.p}")


@lru_cache(maxsize=16)
def _grid_points(n: int, half_width: float, points_per_axis: int):
    "Flattened tensor grid in z with trapezoid weights; cached and read-only."
    z = np.linspace(-half_width, half_width, points_per_axis)
    h = 2.0 * half_width / (points_per_axis - 1)
    w = np.full(points_per_axis, h)
    w[0] = w[-1] = h / 2.0
    axes = np.meshgrid(*([z] * n), indexing="ij")
    points = np.stack([a.ravel() for a in axes], axis=1)
    weights = np.ones(points.shape[0])
    for wa in np.meshgrid(*([w] * n), indexing="ij"):
        weights = weights * wa.ravel()
    points.setflags(write=False)
    weights.setflags(write=False)
    return points, weights


def lp_error_norm(diff, t: float, grid: GridSpec, n: int) -> float:
    """Grid L^p norm of a pointwise evaluator at time t.

    For finite p this is the trapezoid approximation of
    (integral |diff|^p dx)^(1/p) on the scaled grid x = sqrt(t) z; for
    p = infinity it is the grid maximum of |diff|.
    """
    if t <= 0:
        raise ValueError(f"time must be positive, got {t}")
    z_points, z_weights = _grid_points(n, grid.half_width, grid.points_per_axis)
    x = math.sqrt(t) * z_points
    values = np.asarray(diff(x, t), dtype=np.float64)
    bad = np.flatnonzero(~np.isfinite(values))
    if bad.size:
        q = bad[0]
        raise ValueError(f"non-finite sample {values[q]} at x = {x[q]}")
    if math.isinf(grid.p):
        return float(np.max(np.abs(values)))
    # np.sum's pairwise reduction keeps the summation tree fixed
    integral = t ** (n / 2) * float(np.sum(z_weights * np.abs(values) ** grid.p))
    return integral ** (1.0 / grid.p)


class ComponentMaxima(NamedTuple):
    """Largest absolute coefficient in each error-component family.

    The shift construction makes all four vanish: ``first_order`` are the
    coefficients on first-derivative corrections, ``mixed_second`` the
    off-axis second-derivative ones, ``diagonal_second`` the diagonal
    second-derivative ones including the time-shift contribution, and
    ``complement`` the moments that must vanish off the surviving index set.
    """

    first_order: float
    mixed_second: float
    diagonal_second: float
    complement: float


def error_component_coefficients(
    table: MomentTable, shifts: ShiftSet, k: int | None = None
) -> ComponentMaxima:
    "Evaluate the four coefficient families from the moment table and shifts."
    k = shifts.k if k is None else k
    if table.max_order < k + 2:
        raise ValueError("moment table too short: need order k+2")
    n = table.n
    denom = (k + 1) * (k + 2)

    first = 0.0
    mixed = 0.0
    diagonal = 0.0
    for alpha in shifts.indices:
        xs = shifts.x_star[alpha]
        ts = shifts.t_star[alpha]
        m_alpha = table[alpha]
        for i in range(n):
            coeff = -table[add(alpha, unit(n, i))] / (k + 1) + m_alpha * xs[i]
            first = max(first, abs(coeff))
            second = add(alpha, tuple(2 if ax == i else 0 for ax in range(n)))
            coeff = table[second] / denom - m_alpha * xs[i] ** 2 / 2.0 + m_alpha * ts
            diagonal = max(diagonal, abs(coeff))
            for j in range(i + 1, n):
                cross = add(add(alpha, unit(n, i)), unit(n, j))
                coeff = table[cross] / denom - m_alpha * xs[i] * xs[j] / 2.0
                mixed = max(mixed, abs(coeff))

    complement = 0.0
    surviving = set(shifts.indices)
    for alpha in enumerate_order(n, k):
        if alpha in surviving:
            continue
        for i in range(n):
            complement = max(complement, abs(table[add(alpha, unit(n, i))]))
        for beta in enumerate_order(n, 2):
            complement = max(complement, abs(table[add(alpha, beta)]))

    return ComponentMaxima(first, mixed, diagonal, complement)


def _first_order_component_field(
    table: MomentTable, shifts: ShiftSet, x_star
) -> GaussianTermSum:
    n = table.n
    k = shifts.k
    sign = (-1.0) ** k
    terms = []
    zero = (0.0,) * n
    for alpha in shifts.indices:
        xs = x_star[alpha]
        for i in range(n):
            coeff = -table[add(alpha, unit(n, i))] / (k + 1) + table[alpha] * xs[i]
            terms.append(
                (sign / multi_factorial(alpha) * coeff, add(alpha, unit(n, i)), zero, 0.0)
            )
    return GaussianTermSum.from_terms(n, terms)


def _second_order_component_field(
    table: MomentTable, shifts: ShiftSet, x_star, t_star
) -> GaussianTermSum:
    n = table.n
    k = shifts.k
    sign = (-1.0) ** k
    denom = (k + 1) * (k + 2)
    terms = []
    zero = (0.0,) * n
    for alpha in shifts.indices:
        xs = x_star[alpha]
        pref = sign / multi_factorial(alpha)
        for beta in enumerate_order(n, 2):
            xbeta = 1.0
            for i, b in enumerate(beta):
                xbeta *= xs[i] ** b
            coeff = (
                2.0
                / multi_factorial(beta)
                * (table[add(alpha, beta)] / denom - table[alpha] * xbeta / 2.0)
            )
            terms.append((pref * coeff, add(alpha, beta), zero, 0.0))
        for i in range(n):
            lap = add(alpha, tuple(2 if ax == i else 0 for ax in range(n)))
            terms.append((pref * table[alpha] * t_star[alpha], lap, zero, 0.0))
    return GaussianTermSum.from_terms(n, terms)


def sphere_projected_component_check(
    table: MomentTable,
    shifts: ShiftSet,
    t: float,
    r: float,
    x_star=None,
    t_star=None,
    quadrature: SphereQuadrature | None = None,
) -> float:
    """|sphere average| of the error component killed by parity.

    For even k that is the first-order component (vanishing for arbitrary
    spatial shifts: all derivative orders are odd); for odd k the
    second-order one (vanishing for arbitrary time shifts).  Optional
    overrides replace the derived shifts to exercise the "arbitrary" claim.
    """
    if t <= 0 or r <= 0:
        raise ValueError("need t > 0 and r > 0")
    x_star = shifts.x_star if x_star is None else x_star
    t_star = shifts.t_star if t_star is None else t_star
    if shifts.k % 2 == 0:
        component = _first_order_component_field(table, shifts, x_star)
    else:
        component = _second_order_component_field(table, shifts, x_star, t_star)
    quad = default_sphere_quadrature(table.n) if quadrature is None else quadrature
    if len(component) == 0:
        return 0.0
    return abs(sphere_average(component, r, t, quad))


@dataclass(frozen=True)
class DecayFit:
    "Least-squares log-log fit of errors against times (natural logarithms)."

    times: tuple[float, ...]
    errors: tuple[float, ...]
    slope: float
    intercept: float
    r_squared: float


def fit_decay(times, errors) -> DecayFit:
    "Fit log(error) = slope * log(t) + intercept by ordinary least squares."
    times = tuple(float(t) for t in times)
    errors = tuple(float(e) for e in errors)
    if len(times) < 3:
        raise ValueError("need at least 3 samples to fit a decay rate")
    if len(times) != len(errors):
        raise ValueError("times and errors must have equal length")
    if any(b <= a for a, b in zip(times, times[1:])):
        raise ValueError("times must be strictly increasing")
    if any(e <= 0 for e in errors):
        raise ValueError("errors must be positive to take logarithms")
    log_t = np.log(times)
    log_e = np.log(errors)
    slope, intercept = np.polyfit(log_t, log_e, 1)
    predicted = slope * log_t + intercept
    ss_res = float(np.sum((log_e - predicted) ** 2))
    ss_tot = float(np.sum((log_e - log_e.mean()) ** 2))
    if ss_tot == 0.0:
        r_squared = 1.0 if ss_res < 1e-28 else 0.0
    else:
        r_squared = 1.0 - ss_res / ss_tot
    return DecayFit(
        times=times,
        errors=errors,
        slope=float(slope),
        intercept=float(intercept),
        r_squared=r_squared,
    )


EXPONENT_VARIANTS = ("base", "improved", "sphere", "no_time_shift")


def expected_exponent(k: int, n: int, p: float, variant: str = "base") -> float:
    """Guaranteed decay exponent of t^gamma for the order-k profile in L^p.

    ``base`` is the exponent with both shifts, ``improved`` the rate under
    one extra moment of integrability, ``no_time_shift`` the rate with the
    spatial shift only, and ``sphere`` the sphere-averaged rate (one half
    better than base for even k, equal to base for odd k).
    """
    if not (p >= 1):
        raise ValueError(f"norm index must satisfy p >= 1, got {p}")
    tail = (n / 2.0) * (1.0 - (0.0 if math.isinf(p) else 1.0 / p))
    if variant == "base":
        return (k + 2) / 2.0 + tail
    if variant == "improved":
        return (k + 3) / 2.0 + tail
    if variant == "no_time_shift":
        return (k + 1) / 2.0 + tail
    if variant == "sphere":
        return ((k + 3) if k % 2 == 0 else (k + 2)) / 2.0 + tail
    raise ValueError(f"unknown variant {variant!r}; expected one of {EXPONENT_VARIANTS}")
