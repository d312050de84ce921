# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled per-sample loops for the tapped all-pass cascade.

Signatures mirror ``_pykernels``; ``aptvdf._kernels`` picks one at import.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs
from libc.stdint cimport int64_t

cnp.import_array()

cdef enum:
    NEAREST_EVEN = 0
    NEAREST_AWAY = 1
    TRUNCATE = 2
    SATURATE = 0


def allpass_cascade(x, double alpha, coeffs, bint double_stage,
                    Py_ssize_t complement_tap, double[:, ::1] state):
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef const double[::1] h = np.ascontiguousarray(coeffs, dtype=np.float64)
    cdef Py_ssize_t n_samples = xv.shape[0]
    cdef Py_ssize_t n_sections = h.shape[0] - 1
    cdef int per_section = 2 if double_stage else 1
    y_arr = np.empty(n_samples, dtype=np.float64)
    cdef double[::1] y = y_arr
    cdef Py_ssize_t n, k, s
    cdef int j
    cdef double tap, acc, d_tap, out, max_abs = 0.0

    for n in range(n_samples):
        tap = xv[n]
        if fabs(tap) > max_abs:
            max_abs = fabs(tap)
        acc = h[0] * tap
        d_tap = tap
        s = 0
        for k in range(1, n_sections + 1):
            for j in range(per_section):
                out = -alpha * tap + state[s, 0] + alpha * state[s, 1]
                state[s, 0] = tap
                state[s, 1] = out
                tap = out
                if fabs(tap) > max_abs:
                    max_abs = fabs(tap)
                s += 1
            if double_stage:
                tap = -tap
            acc += h[k] * tap
            if k == complement_tap:
                d_tap = tap
        if complement_tap >= 0:
            acc = d_tap - acc
        if fabs(acc) > max_abs:
            max_abs = fabs(acc)
        y[n] = acc
    return y_arr, max_abs


cdef inline int64_t _shift_round(int64_t v, int s, int rounding) nogil:
    cdef int64_t q, r, half
    if s <= 0:
        return v * ((<int64_t>1) << -s)
    q = v >> s
    if rounding == TRUNCATE:
        return q
    r = v - q * ((<int64_t>1) << s)
    half = (<int64_t>1) << (s - 1)
    if r > half:
        return q + 1
    if r < half:
        return q
    if rounding == NEAREST_AWAY:
        return q + 1 if v > 0 else q
    return q + (q & 1)


cdef inline int64_t _overflow(int64_t v, int width, int mode) nogil:
    cdef int64_t lo = -((<int64_t>1) << (width - 1))
    cdef int64_t hi = ((<int64_t>1) << (width - 1)) - 1
    cdef int64_t span
    if lo <= v <= hi:
        return v
    if mode == SATURATE:
        return hi if v > hi else lo
    span = (<int64_t>1) << width
    return ((v - lo) & (span - 1)) + lo


def fixed_cascade(x, int64_t alpha_q, h_q, bint double_stage,
                  Py_ssize_t complement_tap, x_prev, y_prev,
                  int coeff_frac, int data_width, int acc_width,
                  int rounding, int ovf):
    cdef const int64_t[::1] xv = np.asarray(x, dtype=np.int64)
    cdef const int64_t[::1] h = np.asarray(h_q, dtype=np.int64)
    xp_arr = np.asarray(x_prev, dtype=np.int64)
    yp_arr = np.asarray(y_prev, dtype=np.int64)
    cdef int64_t[::1] xp = xp_arr
    cdef int64_t[::1] yp = yp_arr
    cdef Py_ssize_t n_samples = xv.shape[0]
    cdef Py_ssize_t n_sections = h.shape[0] - 1
    cdef int per_section = 2 if double_stage else 1
    cdef int64_t one = (<int64_t>1) << coeff_frac
    out_arr = np.empty(n_samples, dtype=np.int64)
    cdef int64_t[::1] out = out_arr
    cdef Py_ssize_t n, k, s
    cdef int j
    cdef int64_t tap, acc, d_tap, wide

    with nogil:
        for n in range(n_samples):
            tap = xv[n]
            acc = h[0] * tap
            d_tap = tap
            s = 0
            for k in range(1, n_sections + 1):
                for j in range(per_section):
                    wide = -alpha_q * tap + xp[s] * one + alpha_q * yp[s]
                    wide = _overflow(wide, acc_width, ovf)
                    xp[s] = tap
                    tap = _overflow(_shift_round(wide, coeff_frac, rounding), data_width, ovf)
                    yp[s] = tap
                    s += 1
                if double_stage:
                    tap = _overflow(-tap, data_width, ovf)
                acc += h[k] * tap
                if k == complement_tap:
                    d_tap = tap
            if complement_tap >= 0:
                acc = d_tap * one - acc
            acc = _overflow(acc, acc_width, ovf)
            out[n] = _overflow(_shift_round(acc, coeff_frac, rounding), data_width, ovf)

    x_prev[:] = [int(v) for v in xp_arr]
    y_prev[:] = [int(v) for v in yp_arr]
    return [int(v) for v in out_arr]
