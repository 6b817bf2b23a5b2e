"""Pure-numpy implementation of the hot evaluation kernel.

Mirrors the compiled ``heatshift._core`` extension and is selected at import
time when the extension is unavailable (or when HEATSHIFT_BACKEND=python).
Term accumulation order matches the compiled loop so both backends produce
the same reduction order; individual values may still differ by rounding in
the last couple of bits because the exp implementations differ.
"""

import numpy as np


def hermite_values(order, z):
    "Physicists' Hermite polynomial H_order(z), elementwise, via the three-term recurrence."
    z = np.asarray(z, dtype=np.float64)
    h_prev = np.ones_like(z)
    if order == 0:
        return h_prev
    h = 2.0 * z
    for j in range(1, order):
        h, h_prev = 2.0 * z * h - 2.0 * j * h_prev, h
    return h


def eval_derivative_gaussian_sum(points, t, coeffs, alphas, x_shifts, t_shifts, out):
    """Accumulate sum_j coeffs[j] * D^{alphas[j]} G_{t - t_shifts[j]}(points - x_shifts[j]).

    G_s is the n-dimensional heat kernel (4 pi s)^{-n/2} exp(-|y|^2 / 4s) and
    D^alpha its spatial derivative, evaluated through the Hermite product
    formula.  The caller guarantees t > max(t_shifts).
    """
    m, n = points.shape
    for j in range(coeffs.shape[0]):
        s = t - t_shifts[j]
        scale = 1.0 / (2.0 * np.sqrt(s))
        total = int(alphas[j].sum())
        pref = coeffs[j] * (4.0 * np.pi * s) ** (-0.5 * n)
        if total:
            pref *= (-scale) ** total
        z = (points - x_shifts[j]) * scale
        vals = pref * np.exp(-(z * z).sum(axis=1))
        for i in range(n):
            a = int(alphas[j, i])
            if a:
                vals *= hermite_values(a, z[:, i])
        out += vals
    return out
