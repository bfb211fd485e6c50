# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled pointwise kernels; semantics match ``_ref.py``."""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def cubic_mag(double[:, ::1] u):
    """|u|^2 u for u of shape (m, n)."""
    cdef Py_ssize_t m = u.shape[0]
    cdef Py_ssize_t n = u.shape[1]
    out_arr = np.empty((m, n), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t j, c
    cdef double mag2
    if m == 3:
        for j in range(n):
            mag2 = u[0, j] * u[0, j] + u[1, j] * u[1, j] + u[2, j] * u[2, j]
            out[0, j] = mag2 * u[0, j]
            out[1, j] = mag2 * u[1, j]
            out[2, j] = mag2 * u[2, j]
    else:
        for j in range(n):
            mag2 = 0.0
            for c in range(m):
                mag2 += u[c, j] * u[c, j]
            for c in range(m):
                out[c, j] = mag2 * u[c, j]
    return out_arr


def cross3(double[:, ::1] a, double[:, ::1] b):
    """Componentwise cross product of two (3, n) arrays."""
    cdef Py_ssize_t n = a.shape[1]
    out_arr = np.empty((3, n), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t j
    for j in range(n):
        out[0, j] = a[1, j] * b[2, j] - a[2, j] * b[1, j]
        out[1, j] = a[2, j] * b[0, j] - a[0, j] * b[2, j]
        out[2, j] = a[0, j] * b[1, j] - a[1, j] * b[0, j]
    return out_arr


def dot_scale(double[:, ::1] u, double[::1] a):
    """(a . u) u for u of shape (m, n) and a of shape (m,)."""
    cdef Py_ssize_t m = u.shape[0]
    cdef Py_ssize_t n = u.shape[1]
    out_arr = np.empty((m, n), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t j, c
    cdef double s
    for j in range(n):
        s = 0.0
        for c in range(m):
            s += a[c] * u[c, j]
        for c in range(m):
            out[c, j] = s * u[c, j]
    return out_arr


def easy_axis_field(double[:, ::1] u, double[::1] e, double lam1, double lam2):
    """lam1 (e.u) e - lam2 (e.u)^3 e for u of shape (3, n), unit e."""
    cdef Py_ssize_t n = u.shape[1]
    out_arr = np.empty((3, n), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t j
    cdef double s, w
    for j in range(n):
        s = e[0] * u[0, j] + e[1] * u[1, j] + e[2] * u[2, j]
        w = lam1 * s - lam2 * s * s * s
        out[0, j] = w * e[0]
        out[1, j] = w * e[1]
        out[2, j] = w * e[2]
    return out_arr
