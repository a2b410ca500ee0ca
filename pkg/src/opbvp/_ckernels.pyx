# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot kernels; same contracts as ``_pykernels``."""

import numpy as np
cimport numpy as cnp

cnp.import_array()


cdef inline void _matmul(const double[:, ::1] A, const double[:, ::1] X, double[:, ::1] out, Py_ssize_t d) noexcept nogil:
    cdef Py_ssize_t i, j, l
    cdef double acc
    for i in range(d):
        for j in range(d):
            acc = 0.0
            for l in range(d):
                acc = acc + A[i, l] * X[l, j]
            out[i, j] = acc


def rk4_propagate(Bh, double h):
    cdef const double[:, :, ::1] B = np.ascontiguousarray(Bh, dtype=np.float64)
    cdef Py_ssize_t m = (B.shape[0] - 1) // 2
    cdef Py_ssize_t d = B.shape[1]
    U_arr = np.empty((m + 1, d, d))
    cdef double[:, :, ::1] U = U_arr
    cdef double[:, ::1] k1 = np.empty((d, d))
    cdef double[:, ::1] k2 = np.empty((d, d))
    cdef double[:, ::1] k3 = np.empty((d, d))
    cdef double[:, ::1] k4 = np.empty((d, d))
    cdef double[:, ::1] tmp = np.empty((d, d))
    cdef Py_ssize_t k, i, j
    cdef double half = 0.5 * h
    cdef double sixth = h / 6.0
    with nogil:
        for i in range(d):
            for j in range(d):
                U[0, i, j] = 1.0 if i == j else 0.0
        for k in range(m):
            _matmul(B[2 * k], U[k], k1, d)
            for i in range(d):
                for j in range(d):
                    tmp[i, j] = U[k, i, j] + half * k1[i, j]
            _matmul(B[2 * k + 1], tmp, k2, d)
            for i in range(d):
                for j in range(d):
                    tmp[i, j] = U[k, i, j] + half * k2[i, j]
            _matmul(B[2 * k + 1], tmp, k3, d)
            for i in range(d):
                for j in range(d):
                    tmp[i, j] = U[k, i, j] + h * k3[i, j]
            _matmul(B[2 * k + 2], tmp, k4, d)
            for i in range(d):
                for j in range(d):
                    U[k + 1, i, j] = U[k, i, j] + sixth * (k1[i, j] + 2.0 * k2[i, j] + 2.0 * k3[i, j] + k4[i, j])
    return U_arr


def cumulative_quadrature(w_in, double h):
    cdef const double[:, ::1] w = np.ascontiguousarray(w_in, dtype=np.float64)
    cdef Py_ssize_t m = w.shape[0] - 1
    cdef Py_ssize_t q = w.shape[1]
    out_arr = np.zeros((m + 1, q))
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t k, j
    cdef double c3 = h / 3.0
    cdef double c38 = 3.0 * h / 8.0
    with nogil:
        for k in range(2, m + 1, 2):
            for j in range(q):
                out[k, j] = out[k - 2, j] + c3 * (w[k - 2, j] + 4.0 * w[k - 1, j] + w[k, j])
        if m >= 4:
            for j in range(q):
                out[1, j] = (h / 24.0) * (9.0 * w[0, j] + 19.0 * w[1, j] - 5.0 * w[2, j] + w[3, j])
        else:
            for j in range(q):
                out[1, j] = (h / 12.0) * (5.0 * w[0, j] + 8.0 * w[1, j] - w[2, j])
        for k in range(3, m + 1, 2):
            for j in range(q):
                out[k, j] = out[k - 3, j] + c38 * (w[k - 3, j] + 3.0 * w[k - 2, j] + 3.0 * w[k - 1, j] + w[k, j])
    return out_arr
