"""Sums of shifted spatial derivatives of heat kernels.

This is the single evaluation primitive behind modified kernels, exact heat
propagation and the error diagnostics: a list of terms
(coeff, alpha, x_shift, t_shift) evaluated as

    f(x, t) = sum_j coeff_j * D^{alpha_j} G_{t - t_shift_j}(x - x_shift_j)

where ``G_s(y) = (4 pi s)^{-n/2} exp(-|y|^2 / 4s)`` is the n-dimensional heat
kernel.  The family is closed under linear combination, differentiation and
heat propagation (advancing time only shifts the effective widths), so every
field this package evaluates on a grid reduces to one such sum.

Evaluation dispatches to the compiled ``_core`` extension when it is
importable, otherwise to the numpy fallback ``_core_py``.  Set
``HEATSHIFT_BACKEND=python`` or ``HEATSHIFT_BACKEND=cython`` to force one.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np

from .multiindex import MultiIndex, enumerate_order, multi_factorial

_requested = os.environ.get("HEATSHIFT_BACKEND", "auto").lower()
if _requested == "python":
    from . import _core_py as _core

    _BACKEND = "python"
elif _requested == "cython":
    from . import _core  # noqa: F401  -- ImportError here means no compiled extension

    _BACKEND = "cython"
elif _requested == "auto":
    try:
        from . import _core

        _BACKEND = "cython"
    except ImportError:
        from . import _core_py as _core

        _BACKEND = "python"
else:
    raise ValueError(
        f"HEATSHIFT_BACKEND must be 'auto', 'python' or 'cython', got {_requested!r}"
    )


def active_backend() -> str:
    "Name of the evaluation backend selected at import: 'cython' or 'python'."
    return _BACKEND


@dataclass(frozen=True, eq=False)
class GaussianTermSum:
    """Immutable term list; see the module docstring for the represented function.

    Arrays are shared, never mutated.  ``coeffs`` has shape (J,), ``alphas``
    (J, n) int64, ``x_shifts`` (J, n), ``t_shifts`` (J,).
    """

    n: int
    coeffs: np.ndarray
    alphas: np.ndarray
    x_shifts: np.ndarray
    t_shifts: np.ndarray

    @classmethod
    def from_terms(cls, n: int, terms) -> "GaussianTermSum":
        """Build from an iterable of (coeff, alpha, x_shift, t_shift) tuples.

        Terms with coefficient exactly 0.0 are dropped.
        """
        kept = [term for term in terms if term[0] != 0.0]
        if not kept:
            return cls.empty(n)
        coeffs = np.array([c for c, _, _, _ in kept], dtype=np.float64)
        alphas = np.array([a for _, a, _, _ in kept], dtype=np.int64).reshape(-1, n)
        x_shifts = np.array([x for _, _, x, _ in kept], dtype=np.float64).reshape(-1, n)
        t_shifts = np.array([s for _, _, _, s in kept], dtype=np.float64)
        if np.any(alphas < 0):
            raise ValueError("negative derivative order")
        return cls(n, coeffs, alphas, x_shifts, t_shifts)

    @classmethod
    def empty(cls, n: int) -> "GaussianTermSum":
        return cls(
            n,
            np.empty(0),
            np.empty((0, n), dtype=np.int64),
            np.empty((0, n)),
            np.empty(0),
        )

    def __len__(self) -> int:
        return self.coeffs.shape[0]

    @property
    def min_time(self) -> float:
        "Evaluation is defined for t strictly greater than this."
        if len(self) == 0:
            return -math.inf
        return float(self.t_shifts.max())

    def value(self, points, t: float):
        """Evaluate at one point (shape (n,), returns float) or a batch (m, n)."""
        pts = np.ascontiguousarray(points, dtype=np.float64)
        single = pts.ndim == 1
        if single:
            pts = pts.reshape(1, -1)
        if pts.shape[1] != self.n:
            raise ValueError(f"points have dimension {pts.shape[1]}, expected {self.n}")
        out = np.zeros(pts.shape[0])
        if len(self):
            if t <= self.min_time:
                raise ValueError(
                    f"time {t} not above the minimum admissible time {self.min_time}"
                )
            _core.eval_derivative_gaussian_sum(
                pts, float(t), self.coeffs, self.alphas, self.x_shifts, self.t_shifts, out
            )
        return float(out[0]) if single else out

    __call__ = value

    def scaled(self, factor: float) -> "GaussianTermSum":
        return GaussianTermSum(
            self.n, self.coeffs * factor, self.alphas, self.x_shifts, self.t_shifts
        )

    def __neg__(self) -> "GaussianTermSum":
        return self.scaled(-1.0)

    def __add__(self, other: "GaussianTermSum") -> "GaussianTermSum":
        if other.n != self.n:
            raise ValueError("dimension mismatch")
        return GaussianTermSum(
            self.n,
            np.concatenate([self.coeffs, other.coeffs]),
            np.concatenate([self.alphas, other.alphas]),
            np.concatenate([self.x_shifts, other.x_shifts]),
            np.concatenate([self.t_shifts, other.t_shifts]),
        )

    def __sub__(self, other: "GaussianTermSum") -> "GaussianTermSum":
        return self + (-other)

    def derivative(self, beta: MultiIndex) -> "GaussianTermSum":
        "Spatial derivative D^beta applied termwise."
        if len(beta) != self.n:
            raise ValueError("dimension mismatch")
        return GaussianTermSum(
            self.n,
            self.coeffs,
            self.alphas + np.asarray(beta, dtype=np.int64),
            self.x_shifts,
            self.t_shifts,
        )

    def laplacian_power(self, m: int) -> "GaussianTermSum":
        """(sum_i d^2/dx_i^2)^m, expanded through the multinomial theorem.

        Because every term solves the heat equation, this is also the m-th
        time derivative.
        """
        if m < 0:
            raise ValueError("power must be >= 0")
        if m == 0 or len(self) == 0:
            return self
        pieces = []
        m_fact = math.factorial(m)
        for beta in enumerate_order(self.n, m):
            weight = m_fact / multi_factorial(beta)
            shifted = self.derivative(tuple(2 * b for b in beta))
            pieces.append(shifted.scaled(weight))
        total = pieces[0]
        for piece in pieces[1:]:
            total = total + piece
        return total

    def advanced(self, dt: float) -> "GaussianTermSum":
        """Propagate by the heat flow for time dt >= 0.

        The result evaluated at time t equals this sum evaluated at t + dt.
        """
        if dt < 0:
            raise ValueError("dt must be >= 0")
        return GaussianTermSum(
            self.n, self.coeffs, self.alphas, self.x_shifts, self.t_shifts - dt
        )
