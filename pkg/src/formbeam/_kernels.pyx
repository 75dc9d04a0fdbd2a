# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled pattern kernels. See ``_kernels_py`` for the reference versions."""

import numpy as np
cimport numpy as cnp

cdef extern from "math.h" nogil:
    void sincos(double x, double *s, double *c)

cnp.import_array()


cdef void _af(const double[:, ::1] k, const double[:, ::1] pos,
              const double[::1] cr, const double[::1] ci,
              double[::1] out_re, double[::1] out_im) noexcept nogil:
    cdef Py_ssize_t m, n
    cdef Py_ssize_t nm = k.shape[0]
    cdef Py_ssize_t nn = pos.shape[0]
    cdef double kx, ky, kz, ph, c, s, re, im
    for m in range(nm):
        kx = k[m, 0]
        ky = k[m, 1]
        kz = k[m, 2]
        re = 0.0
        im = 0.0
        for n in range(nn):
            ph = kx * pos[n, 0] + ky * pos[n, 1] + kz * pos[n, 2]
            sincos(ph, &s, &c)
            re = re + cr[n] * c - ci[n] * s
            im = im + cr[n] * s + ci[n] * c
        out_re[m] = re
        out_im[m] = im


cdef void _af_grid(const double[:, ::1] k, const double[:, ::1] t,
                   const double[:, :, ::1] rot, double x0, double dx, double y0, double dy,
                   const double[:, :, ::1] cr, const double[:, :, ::1] ci,
                   double[::1] ey_re, double[::1] ey_im,
                   double[::1] out_re, double[::1] out_im) noexcept nogil:
    cdef Py_ssize_t m, n, i, j
    cdef Py_ssize_t nm = k.shape[0]
    cdef Py_ssize_t ns = t.shape[0]
    cdef Py_ssize_t nr = cr.shape[1]
    cdef Py_ssize_t nc = cr.shape[2]
    cdef double kx, ky, kz, qx, qy, s, c
    cdef double sx_re, sx_im, ex_re, ex_im, tmp
    cdef double sy_re, sy_im, py_re, py_im
    cdef double in_re, in_im, row_re, row_im, tot_re, tot_im, sat_re, sat_im
    for m in range(nm):
        kx = k[m, 0]
        ky = k[m, 1]
        kz = k[m, 2]
        tot_re = 0.0
        tot_im = 0.0
        for n in range(ns):
            # local wave vector R^T k; offsets have no z component
            qx = rot[n, 0, 0] * kx + rot[n, 1, 0] * ky + rot[n, 2, 0] * kz
            qy = rot[n, 0, 1] * kx + rot[n, 1, 1] * ky + rot[n, 2, 1] * kz
            sincos(qy * y0, &s, &c)
            py_re = c
            py_im = s
            sincos(qy * dy, &s, &c)
            sy_re = c
            sy_im = s
            for j in range(nc):
                ey_re[j] = py_re
                ey_im[j] = py_im
                tmp = py_re * sy_re - py_im * sy_im
                py_im = py_re * sy_im + py_im * sy_re
                py_re = tmp
            sincos(qx * x0, &s, &c)
            ex_re = c
            ex_im = s
            sincos(qx * dx, &s, &c)
            sx_re = c
            sx_im = s
            in_re = 0.0
            in_im = 0.0
            for i in range(nr):
                row_re = 0.0
                row_im = 0.0
                for j in range(nc):
                    row_re = row_re + cr[n, i, j] * ey_re[j] - ci[n, i, j] * ey_im[j]
                    row_im = row_im + cr[n, i, j] * ey_im[j] + ci[n, i, j] * ey_re[j]
                in_re = in_re + ex_re * row_re - ex_im * row_im
                in_im = in_im + ex_re * row_im + ex_im * row_re
                tmp = ex_re * sx_re - ex_im * sx_im
                ex_im = ex_re * sx_im + ex_im * sx_re
                ex_re = tmp
            sincos(kx * t[n, 0] + ky * t[n, 1] + kz * t[n, 2], &s, &c)
            tot_re = tot_re + c * in_re - s * in_im
            tot_im = tot_im + c * in_im + s * in_re
        out_re[m] = tot_re
        out_im[m] = tot_im


def _check(kv, pv, c):
    if kv.shape[1] != 3 or pv.shape[1] != 3 or c.shape[0] != pv.shape[0]:
        raise ValueError("shape mismatch between directions, positions and coefficients")


def array_factor(k, positions, coef):
    """``sum_n coef[n] * exp(1j * k[m] . positions[n])`` for every row of k."""
    cdef double[:, ::1] kv = np.ascontiguousarray(k, dtype=np.float64)
    cdef double[:, ::1] pv = np.ascontiguousarray(positions, dtype=np.float64)
    c = np.ascontiguousarray(coef, dtype=np.complex128)
    _check(kv, pv, c)
    cdef double[::1] cr = np.ascontiguousarray(c.real)
    cdef double[::1] ci = np.ascontiguousarray(c.imag)
    re = np.empty(kv.shape[0])
    im = np.empty(kv.shape[0])
    cdef double[::1] rv = re
    cdef double[::1] iv = im
    with nogil:
        _af(kv, pv, cr, ci, rv, iv)
    return re + 1j * im


def array_factor_power(k, positions, coef):
    """``|array_factor(k, positions, coef)|**2``."""
    s = array_factor(k, positions, coef)
    return s.real * s.real + s.imag * s.imag


def grid_array_factor(k, translations, rotations, x0, dx, y0, dy, coef):
    """Array factor of satellites carrying identical regular planar grids.

    Element (n, i, j) sits at ``t[n] + R[n] @ (x0 + i*dx, y0 + j*dy, 0)``;
    ``coef`` has shape (Ns, Nr, Nc).
    """
    cdef double[:, ::1] kv = np.ascontiguousarray(k, dtype=np.float64)
    cdef double[:, ::1] tv = np.ascontiguousarray(translations, dtype=np.float64)
    cdef double[:, :, ::1] rv = np.ascontiguousarray(rotations, dtype=np.float64)
    c = np.ascontiguousarray(coef, dtype=np.complex128)
    if kv.shape[1] != 3 or tv.shape[1] != 3 or c.ndim != 3 or c.shape[0] != tv.shape[0] \
            or rv.shape[0] != tv.shape[0]:
        raise ValueError("shape mismatch between directions, poses and coefficients")
    cdef double[:, :, ::1] cr = np.ascontiguousarray(c.real)
    cdef double[:, :, ::1] ci = np.ascontiguousarray(c.imag)
    cdef double[::1] eyr = np.empty(c.shape[2])
    cdef double[::1] eyi = np.empty(c.shape[2])
    re = np.empty(kv.shape[0])
    im = np.empty(kv.shape[0])
    cdef double[::1] orv = re
    cdef double[::1] oiv = im
    cdef double fx0 = x0, fdx = dx, fy0 = y0, fdy = dy
    with nogil:
        _af_grid(kv, tv, rv, fx0, fdx, fy0, fdy, cr, ci, eyr, eyi, orv, oiv)
    return re + 1j * im
