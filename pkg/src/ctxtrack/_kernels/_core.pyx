# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled versions of the hot kernels. Semantics match ._kernels.pure."""

import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY, NAN, acos, cos, fabs, log, sqrt

cnp.import_array()

DEF TWO_PI_3 = 2.0943951023931953  # 2*pi/3


def match_count(double[::1] values, double[::1] means, double eps):
    """Count values within ratio distance eps of at least one codeword mean."""
    cdef Py_ssize_t n = values.shape[0]
    cdef Py_ssize_t m = means.shape[0]
    cdef Py_ssize_t i, j
    cdef int count = 0
    cdef double v, mu, hi, lo, dist
    for i in range(n):
        v = values[i]
        for j in range(m):
            mu = means[j]
            if v == mu:
                dist = 0.0
            else:
                if v > mu:
                    hi = v; lo = mu
                else:
                    hi = mu; lo = v
                dist = 1.0 - lo / hi
            if dist < eps:
                count += 1
                break
    return count


def hist_intersection(double[:, ::1] ha, double[:, ::1] hb):
    """All-pairs histogram intersection over the last axis."""
    cdef Py_ssize_t n = ha.shape[0]
    cdef Py_ssize_t m = hb.shape[0]
    cdef Py_ssize_t nbins = ha.shape[1]
    if hb.shape[1] != nbins:
        raise ValueError("histogram bin counts differ")
    out_arr = np.empty((n, m), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, j, b
    cdef double acc, x, y
    for i in range(n):
        for j in range(m):
            acc = 0.0
            for b in range(nbins):
                x = ha[i, b]
                y = hb[j, b]
                acc += x if x < y else y
            out[i, j] = acc
    return out_arr


cdef inline void _sym3_eigvals(double m00, double m01, double m02,
                               double m11, double m12, double m22,
                               double* lam) nogil:
    # closed-form eigenvalues of a symmetric 3x3 matrix
    cdef double p1 = m01 * m01 + m02 * m02 + m12 * m12
    cdef double q = (m00 + m11 + m22) / 3.0
    cdef double p2 = (m00 - q) * (m00 - q) + (m11 - q) * (m11 - q) + (m22 - q) * (m22 - q) + 2.0 * p1
    cdef double p, b00, b01, b02, b11, b12, b22, r, phi
    if p2 <= 1e-300:
        lam[0] = q; lam[1] = q; lam[2] = q
        return
    p = sqrt(p2 / 6.0)
    b00 = (m00 - q) / p; b11 = (m11 - q) / p; b22 = (m22 - q) / p
    b01 = m01 / p; b02 = m02 / p; b12 = m12 / p
    r = (b00 * (b11 * b22 - b12 * b12)
         - b01 * (b01 * b22 - b12 * b02)
         + b02 * (b01 * b12 - b11 * b02)) / 2.0
    if r > 1.0:
        r = 1.0
    elif r < -1.0:
        r = -1.0
    phi = acos(r) / 3.0
    lam[2] = q + 2.0 * p * cos(phi)                # largest
    lam[0] = q + 2.0 * p * cos(phi + TWO_PI_3)     # smallest
    lam[1] = 3.0 * q - lam[0] - lam[2]


def cov_log_distance(double[:, ::1] ca, double[:, ::1] cb, double reg=1e-6):
    """All-pairs log-eigenvalue distance between covariance descriptors.

    Rows are upper triangles [c00 c01 c02 c11 c12 c22]; each matrix gets
    reg added to its diagonal before the generalized eigenproblem.
    """
    cdef Py_ssize_t n = ca.shape[0]
    cdef Py_ssize_t m = cb.shape[0]
    out_arr = np.empty((n, m), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, j
    cdef double b00, b01, b02, b11, b12, b22
    cdef double l00, l10, l11, l20, l21, l22
    cdef double i00, i10, i11, i20, i21, i22
    cdef double a00, a01, a02, a11, a12, a22
    cdef double t00, t01, t02, t10, t11, t12, t20, t21, t22
    cdef double m00, m01, m02, m11_, m12_, m22_
    cdef double lam[3]
    cdef double acc, lv
    cdef Py_ssize_t k
    for j in range(m):
        b00 = cb[j, 0] + reg; b01 = cb[j, 1]; b02 = cb[j, 2]
        b11 = cb[j, 3] + reg; b12 = cb[j, 4]; b22 = cb[j, 5] + reg
        # Cholesky B = L L^T
        l00 = sqrt(b00)
        l10 = b01 / l00
        l20 = b02 / l00
        l11 = sqrt(b11 - l10 * l10)
        l21 = (b12 - l20 * l10) / l11
        l22 = sqrt(b22 - l20 * l20 - l21 * l21)
        # inverse of lower-triangular L
        i00 = 1.0 / l00
        i11 = 1.0 / l11
        i22 = 1.0 / l22
        i10 = -l10 * i00 * i11
        i21 = -l21 * i11 * i22
        i20 = (l10 * l21 - l11 * l20) * i00 * i11 * i22
        for i in range(n):
            a00 = ca[i, 0] + reg; a01 = ca[i, 1]; a02 = ca[i, 2]
            a11 = ca[i, 3] + reg; a12 = ca[i, 4]; a22 = ca[i, 5] + reg
            # T = Linv A
            t00 = i00 * a00
            t01 = i00 * a01
            t02 = i00 * a02
            t10 = i10 * a00 + i11 * a01
            t11 = i10 * a01 + i11 * a11
            t12 = i10 * a02 + i11 * a12
            t20 = i20 * a00 + i21 * a01 + i22 * a02
            t21 = i20 * a01 + i21 * a11 + i22 * a12
            t22 = i20 * a02 + i21 * a12 + i22 * a22
            # M = T Linv^T (symmetric)
            m00 = t00 * i00
            m01 = t00 * i10 + t01 * i11
            m02 = t00 * i20 + t01 * i21 + t02 * i22
            m11_ = t10 * i10 + t11 * i11
            m12_ = t10 * i20 + t11 * i21 + t12 * i22
            m22_ = t20 * i20 + t21 * i21 + t22 * i22
            _sym3_eigvals(m00, m01, m02, m11_, m12_, m22_, lam)
            acc = 0.0
            for k in range(3):
                lv = lam[k]
                if lv < 1e-300:
                    lv = 1e-300
                lv = log(lv)
                acc += lv * lv
            out[i, j] = sqrt(acc)
    return out_arr


def cov_log_distance_paired(double[:, ::1] ca, double[:, ::1] cb, double reg=1e-6):
    """Row-wise log-eigenvalue distance for aligned (n, 6) covariance rows."""
    cdef Py_ssize_t n = ca.shape[0]
    if cb.shape[0] != n:
        raise ValueError("paired inputs must have equal length")
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i, k
    cdef double b00, b01, b02, b11, b12, b22
    cdef double l00, l10, l11, l20, l21, l22
    cdef double i00, i10, i11, i20, i21, i22
    cdef double a00, a01, a02, a11, a12, a22
    cdef double t00, t01, t02, t10, t11, t12, t20, t21, t22
    cdef double m00, m01, m02, m11_, m12_, m22_
    cdef double lam[3]
    cdef double acc, lv
    for i in range(n):
        b00 = cb[i, 0] + reg; b01 = cb[i, 1]; b02 = cb[i, 2]
        b11 = cb[i, 3] + reg; b12 = cb[i, 4]; b22 = cb[i, 5] + reg
        l00 = sqrt(b00)
        l10 = b01 / l00
        l20 = b02 / l00
        l11 = sqrt(b11 - l10 * l10)
        l21 = (b12 - l20 * l10) / l11
        l22 = sqrt(b22 - l20 * l20 - l21 * l21)
        i00 = 1.0 / l00
        i11 = 1.0 / l11
        i22 = 1.0 / l22
        i10 = -l10 * i00 * i11
        i21 = -l21 * i11 * i22
        i20 = (l10 * l21 - l11 * l20) * i00 * i11 * i22
        a00 = ca[i, 0] + reg; a01 = ca[i, 1]; a02 = ca[i, 2]
        a11 = ca[i, 3] + reg; a12 = ca[i, 4]; a22 = ca[i, 5] + reg
        t00 = i00 * a00
        t01 = i00 * a01
        t02 = i00 * a02
        t10 = i10 * a00 + i11 * a01
        t11 = i10 * a01 + i11 * a11
        t12 = i10 * a02 + i11 * a12
        t20 = i20 * a00 + i21 * a01 + i22 * a02
        t21 = i20 * a01 + i21 * a11 + i22 * a12
        t22 = i20 * a02 + i21 * a12 + i22 * a22
        m00 = t00 * i00
        m01 = t00 * i10 + t01 * i11
        m02 = t00 * i20 + t01 * i21 + t02 * i22
        m11_ = t10 * i10 + t11 * i11
        m12_ = t10 * i20 + t11 * i21 + t12 * i22
        m22_ = t20 * i20 + t21 * i21 + t22 * i22
        _sym3_eigvals(m00, m01, m02, m11_, m12_, m22_, lam)
        acc = 0.0
        for k in range(3):
            lv = lam[k]
            if lv < 1e-300:
                lv = 1e-300
            lv = log(lv)
            acc += lv * lv
        out[i] = sqrt(acc)
    return out_arr


def best_stump(double[::1] values_sorted, double[::1] y_sorted, double[::1] w_sorted):
    """Best decision stump on one presorted feature; see the pure backend."""
    cdef Py_ssize_t n = values_sorted.shape[0]
    if n < 2:
        return INFINITY, NAN, 0
    cdef double tot_pos = 0.0, tot_neg = 0.0
    cdef Py_ssize_t i
    for i in range(n):
        if y_sorted[i] > 0:
            tot_pos += w_sorted[i]
        else:
            tot_neg += w_sorted[i]
    cdef double total = tot_pos + tot_neg
    cdef double cum_pos = 0.0, cum_neg = 0.0
    cdef double best_err = INFINITY, best_thr = NAN
    cdef int best_pol = 0
    cdef double err_plus, err_minus
    for i in range(n - 1):
        if y_sorted[i] > 0:
            cum_pos += w_sorted[i]
        else:
            cum_neg += w_sorted[i]
        if values_sorted[i + 1] > values_sorted[i]:
            err_plus = cum_pos + (tot_neg - cum_neg)
            if err_plus < best_err:
                best_err = err_plus
                best_thr = 0.5 * (values_sorted[i] + values_sorted[i + 1])
                best_pol = 1
            err_minus = total - err_plus
            if err_minus < best_err:
                best_err = err_minus
                best_thr = 0.5 * (values_sorted[i] + values_sorted[i + 1])
                best_pol = -1
    if best_pol == 0:
        return INFINITY, NAN, 0
    return best_err, best_thr, best_pol
