# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled evaluation kernel for sums of shifted derivative-of-Gaussian terms.

Same contract as ``heatshift._core_py``; see there for the formula.
"""

from libc.math cimport M_PI, exp, pow, sqrt

import numpy as np


def hermite_values(long long order, z):
    "Physicists' Hermite polynomial H_order(z), elementwise."
    cdef double[::1] zv = np.ascontiguousarray(z, dtype=np.float64).ravel()
    out = np.empty(zv.shape[0])
    cdef double[::1] ov = out
    cdef Py_ssize_t q
    with nogil:
        for q in range(zv.shape[0]):
            ov[q] = _hermite(order, zv[q])
    return out.reshape(np.shape(z))


cdef inline double _hermite(long long order, double z) noexcept nogil:
    cdef double h_prev = 1.0
    cdef double h, h_next
    cdef long long j
    if order == 0:
        return h_prev
    h = 2.0 * z
    for j in range(1, order):
        h_next = 2.0 * z * h - 2.0 * j * h_prev
        h_prev = h
        h = h_next
    return h


def eval_derivative_gaussian_sum(double[:, ::1] points, double t,
                                 double[::1] coeffs, long long[:, ::1] alphas,
                                 double[:, ::1] x_shifts, double[::1] t_shifts,
                                 double[::1] out):
    """Accumulate sum_j coeffs[j] * D^{alphas[j]} G_{t - t_shifts[j]}(points - x_shifts[j])."""
    cdef Py_ssize_t m = points.shape[0]
    cdef Py_ssize_t n = points.shape[1]
    cdef Py_ssize_t nterms = coeffs.shape[0]
    cdef Py_ssize_t q, j, i
    cdef double s, scale, pref, acc, z, e, val
    cdef long long a, total

    prefs_arr = np.empty(nterms)
    scales_arr = np.empty(nterms)
    cdef double[::1] prefs = prefs_arr
    cdef double[::1] scales = scales_arr
    for j in range(nterms):
        s = t - t_shifts[j]
        scale = 1.0 / (2.0 * sqrt(s))
        total = 0
        for i in range(n):
            total += alphas[j, i]
        pref = coeffs[j] * pow(4.0 * M_PI * s, -0.5 * n)
        if total:
            pref *= pow(-scale, <double> total)
        prefs[j] = pref
        scales[j] = scale

    with nogil:
        for q in range(m):
            acc = 0.0
            for j in range(nterms):
                e = 0.0
                val = 1.0
                for i in range(n):
                    z = (points[q, i] - x_shifts[j, i]) * scales[j]
                    e += z * z
                    a = alphas[j, i]
                    if a:
                        val *= _hermite(a, z)
                acc += prefs[j] * exp(-e) * val
            out[q] += acc
    return np.asarray(out)
