"""Shift derivation: surviving index sets, spatial and time shifts, diagnostics.

For an initial datum with moment table M, the order-k profile recentres each
derivative term D^alpha G on a starred centre in space and time:

    x_star[alpha]_i = M[alpha + e_i] / ((k+1) M[alpha])

and, when the second-order moment matrix around that centre is a multiple of
the identity (the isotropy condition checked here), a single constant
c_alpha per index defines the time shift t_star[alpha] = -c_alpha / M[alpha].
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .initialdata import MomentTable
from .multiindex import MultiIndex, add, enumerate_order, unit

DEFAULT_ISOTROPY_TOL = 1e-9


class ShiftDerivationError(ValueError):
    "Raised when shift data cannot be derived from the supplied moment table."


def nonzero_moment_indices(
    table: MomentTable, k: int, zero_tol: float | None = None
) -> tuple[MultiIndex, ...]:
    """Indices of order k whose moments are nonzero.

    A moment counts as nonzero when |M[alpha]| exceeds zero_tol times the
    largest same-order moment magnitude; the tolerance defaults to the
    table's own.  Returns an empty tuple when the whole order vanishes.
    """
    if k > table.max_order:
        raise ValueError(f"order {k} exceeds the table's max order {table.max_order}")
    tol = table.zero_tol if zero_tol is None else zero_tol
    threshold = tol * table.max_abs_of_order(k)
    return tuple(a for a in enumerate_order(table.n, k) if abs(table[a]) > threshold)


def find_min_nondegenerate_order(
    table: MomentTable, k_max: int, zero_tol: float | None = None
) -> int | None:
    "Smallest order <= k_max with a surviving index, or None if all vanish."
    if k_max > table.max_order:
        raise ValueError(f"k_max {k_max} exceeds the table's max order {table.max_order}")
    for k in range(k_max + 1):
        if nonzero_moment_indices(table, k, zero_tol):
            return k
    return None


def spatial_shifts(
    table: MomentTable, k: int, indices
) -> dict[MultiIndex, tuple[float, ...]]:
    "Starred spatial centres x_star[alpha]_i = M[alpha+e_i] / ((k+1) M[alpha])."
    indices = tuple(tuple(a) for a in indices)
    if not indices:
        raise ShiftDerivationError("empty index set; nothing to shift")
    if table.max_order < k + 1:
        raise ValueError("moment table too short: need order k+1")
    floor = table.zero_tol * table.max_abs_of_order(k)
    result = {}
    for alpha in indices:
        m_alpha = table[alpha]
        if abs(m_alpha) <= floor:
            raise ShiftDerivationError(
                f"moment at {alpha} is below the zero threshold; inconsistent index set"
            )
        result[alpha] = tuple(
            table[add(alpha, unit(table.n, i))] / ((k + 1) * m_alpha)
            for i in range(table.n)
        )
    return result


@dataclass(frozen=True)
class IsotropyReport:
    """Outcome of the second-moment isotropy check.

    For each surviving index the matrix

        A[alpha]_ij = M[alpha+e_i+e_j] / ((k+1)(k+2)) - M[alpha] x_star_i x_star_j / 2

    must be c_alpha times the identity: off-diagonal entries vanish and the
    diagonal entries agree (their mean defines ``constants[alpha]``).  The
    complement condition additionally requires every moment M[alpha+e_i] and
    M[alpha+beta], |beta| = 2, to vanish for the order-k indices *not* in the
    surviving set.  Residuals are compared against tol * (1 + |M[alpha]| * scale)
    with scale the largest moment magnitude up to order k+2; ``violations``
    lists (alpha, i, j, residual) for every failed comparison, with j = None
    for the first-order complement moments.
    """

    holds: bool
    constants: dict[MultiIndex, float]
    max_offdiag_residual: float
    max_diag_spread: float
    complement_residual: float
    violations: tuple
    tol: float


def check_shift_isotropy(
    table: MomentTable,
    k: int,
    indices,
    x_star: dict[MultiIndex, tuple[float, ...]],
    tol: float = DEFAULT_ISOTROPY_TOL,
) -> IsotropyReport:
    "Verify the isotropy and complement conditions; failures are reported, not raised."
    if table.max_order < k + 2:
        raise ValueError("moment table too short: need order k+2")
    n = table.n
    indices = tuple(tuple(a) for a in indices)
    scale = table.max_abs_up_to(k + 2)
    denom = (k + 1) * (k + 2)

    constants: dict[MultiIndex, float] = {}
    violations = []
    max_offdiag = 0.0
    max_spread = 0.0
    for alpha in indices:
        xs = x_star[alpha]
        threshold = tol * (1.0 + abs(table[alpha]) * scale)
        diag = []
        for i in range(n):
            for j in range(i, n):
                second = add(add(alpha, unit(n, i)), unit(n, j))
                entry = table[second] / denom - table[alpha] * xs[i] * xs[j] / 2.0
                if i == j:
                    diag.append(entry)
                else:
                    max_offdiag = max(max_offdiag, abs(entry))
                    if abs(entry) > threshold:
                        violations.append((alpha, i, j, entry))
        c_alpha = math.fsum(diag) / n
        constants[alpha] = c_alpha
        for i, entry in enumerate(diag):
            spread = abs(entry - c_alpha)
            max_spread = max(max_spread, spread)
            if spread > threshold:
                violations.append((alpha, i, i, spread))

    complement = 0.0
    surviving = set(indices)
    for alpha in enumerate_order(n, k):
        if alpha in surviving:
            continue
        threshold = tol * (1.0 + abs(table[alpha]) * scale)
        for i in range(n):
            value = table[add(alpha, unit(n, i))]
            complement = max(complement, abs(value))
            if abs(value) > threshold:
                violations.append((alpha, i, None, value))
        for beta in enumerate_order(n, 2):
            value = table[add(alpha, beta)]
            complement = max(complement, abs(value))
            if abs(value) > threshold:
                i = next(ax for ax, b in enumerate(beta) if b)
                j = next(ax for ax in range(n - 1, -1, -1) if beta[ax])
                violations.append((alpha, i, j, value))

    return IsotropyReport(
        holds=not violations,
        constants=constants,
        max_offdiag_residual=max_offdiag,
        max_diag_spread=max_spread,
        complement_residual=complement,
        violations=tuple(violations),
        tol=tol,
    )


def time_shifts(
    report: IsotropyReport, table: MomentTable, indices
) -> dict[MultiIndex, float]:
    "Time shifts t_star[alpha] = -c_alpha / M[alpha]; requires the isotropy check to hold."
    if not report.holds:
        raise ShiftDerivationError(
            "isotropy check failed; time shifts are not well defined "
            f"(violations: {report.violations[:3]}...)"
        )
    return {
        tuple(a): -report.constants[tuple(a)] / table[a] for a in indices
    }


@dataclass(frozen=True)
class ShiftSet:
    "Surviving indices of order k with their spatial and time shifts and diagnostics."

    k: int
    indices: tuple[MultiIndex, ...]
    x_star: dict[MultiIndex, tuple[float, ...]]
    t_star: dict[MultiIndex, float]
    report: IsotropyReport


def derive_shift_set(
    table: MomentTable,
    k: int,
    zero_tol: float | None = None,
    isotropy_tol: float = DEFAULT_ISOTROPY_TOL,
) -> ShiftSet:
    """Run the full derivation pipeline for order k.

    Raises ShiftDerivationError when no index of order k survives (use
    find_min_nondegenerate_order to locate the smallest usable order).  When
    the isotropy check fails the returned set carries zero time shifts and a
    failing report; callers that need genuine time shifts must check
    ``report.holds``.
    """
    indices = nonzero_moment_indices(table, k, zero_tol)
    if not indices:
        raise ShiftDerivationError(
            f"no nonzero moments at order {k}; "
            "use find_min_nondegenerate_order to pick the smallest usable order"
        )
    x_star = spatial_shifts(table, k, indices)
    report = check_shift_isotropy(table, k, indices, x_star, isotropy_tol)
    if report.holds:
        t_star = time_shifts(report, table, indices)
    else:
        t_star = {alpha: 0.0 for alpha in indices}
    return ShiftSet(k=k, indices=indices, x_star=x_star, t_star=t_star, report=report)


def with_zero_time_shifts(shifts: ShiftSet) -> ShiftSet:
    "Same spatial shifts, all time shifts zero."
    return ShiftSet(
        k=shifts.k,
        indices=shifts.indices,
        x_star=shifts.x_star,
        t_star={a: 0.0 for a in shifts.indices},
        report=shifts.report,
    )


def with_zero_spatial_shifts(shifts: ShiftSet) -> ShiftSet:
    "Same time shifts, all spatial shifts zero."
    n = len(shifts.indices[0])
    return ShiftSet(
        k=shifts.k,
        indices=shifts.indices,
        x_star={a: (0.0,) * n for a in shifts.indices},
        t_star=shifts.t_star,
        report=shifts.report,
    )


@dataclass(frozen=True)
class ShiftIdentityResiduals:
    """Residuals of the moment identities obeyed by the time shifts.

    ``general`` is the largest mismatch, over surviving indices, of

        n (k+1)(k+2) M[alpha] t_star[alpha]
          = - sum_i [ M[alpha+2e_i] - 2 s M[alpha+e_i] x_star_i + s^2 M[alpha] x_star_i^2 ]

    with scale constant s = (2(k+1) + sqrt(2k(k+1))) / 2.  ``zeroth_order``
    is the k = 0 case (where s = 1 and the right side is the centred second
    moment); for k > 0 it simply repeats ``general``.
    """

    zeroth_order: float
    general: float
    scale: float


def shift_identity_scale(k: int) -> float:
    "The constant s = (2(k+1) + sqrt(2k(k+1))) / 2 in the time-shift identity."
    return (2.0 * (k + 1) + math.sqrt(2.0 * k * (k + 1))) / 2.0


def verify_shift_identities(table: MomentTable, shifts: ShiftSet) -> ShiftIdentityResiduals:
    "Evaluate both sides of the time-shift identities from the moment table."
    k = shifts.k
    n = table.n
    if table.max_order < k + 2:
        raise ValueError("moment table too short: need order k+2")
    s = shift_identity_scale(k)

    def residual(scale_s: float, prefactor: float) -> float:
        worst = 0.0
        for alpha in shifts.indices:
            xs = shifts.x_star[alpha]
            lhs = prefactor * table[alpha] * shifts.t_star[alpha]
            rhs = 0.0
            for i in range(n):
                second = add(alpha, tuple(2 if ax == i else 0 for ax in range(n)))
                first = add(alpha, unit(n, i))
                rhs -= (
                    table[second]
                    - 2.0 * scale_s * table[first] * xs[i]
                    + scale_s**2 * table[alpha] * xs[i] ** 2
                )
            worst = max(worst, abs(lhs - rhs))
        return worst

    general = residual(s, n * (k + 1) * (k + 2))
    zeroth = residual(1.0, 2.0 * n) if k == 0 else general
    return ShiftIdentityResiduals(zeroth_order=zeroth, general=general, scale=s)
