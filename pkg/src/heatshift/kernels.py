"""Heat kernel, its exact derivatives, modified kernels, sphere monomial integrals.

Spatial derivatives of the heat kernel come from the Hermite product formula

    D^alpha G_t(x) = G_t(x) * (-1/(2 sqrt(t)))^{|alpha|} * prod_i H_{alpha_i}(x_i / (2 sqrt(t)))

with physicists' Hermite polynomials H_j.  Time derivatives are realized by
composing Laplacians, which is exact because G_t solves the heat equation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.special import gammaln

from .gaussians import GaussianTermSum
from .initialdata import MomentTable
from .multiindex import MultiIndex, enumerate_order, multi_factorial


def hermite_poly(j: int, z):
    """Physicists' Hermite polynomial H_j(z), scalar or elementwise.

    Uses the three-term recurrence H_{j+1} = 2 z H_j - 2 j H_{j-1}, which is
    stable well past the orders needed here.
    """
    if j < 0:
        raise ValueError(f"Hermite order must be >= 0, got {j}")
    scalar = np.isscalar(z)
    zv = np.asarray(z, dtype=np.float64)
    h_prev = np.ones_like(zv)
    if j == 0:
        return float(h_prev) if scalar else h_prev
    h = 2.0 * zv
    for r in range(1, j):
        h, h_prev = 2.0 * zv * h - 2.0 * r * h_prev, h
    return float(h) if scalar else h


def heat_kernel_field(n: int) -> GaussianTermSum:
    "The heat kernel G_t itself as an evaluator of (points, t)."
    zero = (0,) * n
    return GaussianTermSum.from_terms(n, [(1.0, zero, zero, 0.0)])


def heat_kernel(points, t: float):
    "G_t evaluated at one point (n,) or a batch (m, n)."
    pts = np.asarray(points, dtype=np.float64)
    return heat_kernel_field(pts.shape[-1]).value(pts, t)


@lru_cache(maxsize=None)
def heat_kernel_derivative_field(alpha: MultiIndex, m: int = 0) -> GaussianTermSum:
    """d^m/dt^m D^alpha G_t as an evaluator of (points, t).

    The time derivative is expanded into pure spatial derivatives through
    powers of the Laplacian.
    """
    n = len(alpha)
    zero = (0,) * n
    base = GaussianTermSum.from_terms(n, [(1.0, tuple(alpha), zero, 0.0)])
    return base.laplacian_power(m)


def heat_kernel_derivative(alpha: MultiIndex, m: int, x, t: float) -> float:
    """Exact value of d^m/dt^m D^alpha G_t(x); requires t > 0."""
    if t <= 0:
        raise ValueError(f"time must be positive, got {t}")
    return heat_kernel_derivative_field(tuple(alpha), m).value(x, t)


def sphere_monomial_integral(alpha: MultiIndex, n: int) -> float:
    """integral of omega^alpha over the unit sphere in R^n.

    Zero whenever any component of alpha is odd; for alpha = 2m the value is
    2 prod_i Gamma(m_i + 1/2) / Gamma(|m| + n/2), evaluated through log-Gamma
    to avoid overflow at high orders.
    """
    if n < 2:
        raise ValueError(f"sphere integrals need dimension >= 2, got {n}")
    if len(alpha) != n:
        raise ValueError("multi-index dimension mismatch")
    if any(a < 0 for a in alpha):
        raise ValueError("negative exponent")
    if any(a % 2 for a in alpha):
        return 0.0
    halves = [a // 2 + 0.5 for a in alpha]
    log_value = sum(gammaln(h) for h in halves) - gammaln(sum(a // 2 for a in alpha) + n / 2)
    return 2.0 * math.exp(log_value)


@dataclass(eq=False)
class ModifiedKernel:
    """Moment-matched long-time profile of order k.

    The value is the sum of moment-weighted kernel derivatives up to order
    k - 1 plus, for every surviving index of order k, a derivative term
    recentred by its spatial and time shifts:

        sum_{|a| <= k-1} ((-1)^{|a|}/a!) M_a D^a G_t(x)
      + sum_{a in indices} ((-1)^k /a!) M_a D^a G_{t - t_star[a]}(x - x_star[a])

    Evaluation is defined for t > t_min = max(time shifts, 0).
    """

    k: int
    n: int
    moments: dict[MultiIndex, float]
    indices: tuple[MultiIndex, ...]
    x_star: dict[MultiIndex, tuple[float, ...]]
    t_star: dict[MultiIndex, float]
    t_min: float = field(init=False)
    _field: GaussianTermSum = field(init=False, repr=False)

    def __post_init__(self):
        if self.k < 0:
            raise ValueError("order must be >= 0")
        if not self.indices:
            raise ValueError("no surviving indices of the requested order")
        shifts = [self.t_star[a] for a in self.indices]
        self.t_min = max([0.0, *shifts])
        terms = []
        zero = (0.0,) * self.n
        for total in range(self.k):
            for alpha in enumerate_order(self.n, total):
                coeff = (-1.0) ** total / multi_factorial(alpha) * self.moments[alpha]
                terms.append((coeff, alpha, zero, 0.0))
        sign = (-1.0) ** self.k
        for alpha in self.indices:
            coeff = sign / multi_factorial(alpha) * self.moments[alpha]
            terms.append((coeff, alpha, self.x_star[alpha], self.t_star[alpha]))
        self._field = GaussianTermSum.from_terms(self.n, terms)

    def field(self) -> GaussianTermSum:
        "The kernel as an evaluator of (points, t)."
        return self._field

    def value(self, points, t: float):
        if t <= self.t_min:
            raise ValueError(
                f"time {t} not above the kernel's minimum admissible time {self.t_min}"
            )
        return self._field.value(points, t)


def build_modified_kernel(
    table: MomentTable,
    k: int,
    indices,
    x_star: dict[MultiIndex, tuple[float, ...]],
    t_star: dict[MultiIndex, float],
) -> ModifiedKernel:
    "Assemble a ModifiedKernel from a moment table and shift data."
    if table.max_order < k:
        raise ValueError("moment table too short for the requested order")
    moments = {}
    for total in range(k + 1):
        for alpha in enumerate_order(table.n, total):
            moments[alpha] = table[alpha]
    return ModifiedKernel(
        k=k,
        n=table.n,
        moments=moments,
        indices=tuple(tuple(a) for a in indices),
        x_star={tuple(a): tuple(v) for a, v in x_star.items()},
        t_star={tuple(a): float(v) for a, v in t_star.items()},
    )


def modified_kernel_value(kernel: ModifiedKernel, x, t: float):
    "Value of the modified kernel at x, time t (t must exceed kernel.t_min)."
    return kernel.value(x, t)


def gaussian_lp_norm(t: float, n: int, p: float) -> float:
    "Closed-form L^p norm of G_t over R^n (p may be math.inf)."
    if math.isinf(p):
        return (4.0 * math.pi * t) ** (-n / 2)
    return (4.0 * math.pi * t) ** (-(n / 2) * (1.0 - 1.0 / p)) * p ** (-n / (2 * p))


__all__ = [
    "hermite_poly",
    "heat_kernel",
    "heat_kernel_field",
    "heat_kernel_derivative",
    "heat_kernel_derivative_field",
    "sphere_monomial_integral",
    "ModifiedKernel",
    "build_modified_kernel",
    "modified_kernel_value",
    "gaussian_lp_norm",
]
