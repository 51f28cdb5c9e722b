# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels for the O(n^2) particle interactions.

Kernel-weighted sums always go through the BLAS shipped with scipy.
Squared distances use direct loops below ``BLAS_MIN_DIM`` dimensions and
the Gram trick above. Exponentials are evaluated in vectorized blocks
(``_vexp.h``).

Every reduction over the partner index runs inside one thread, so the
result does not depend on the OpenMP thread count.
"""
from cython.parallel cimport prange
from scipy.linalg.cython_blas cimport dgemm

cdef extern from "_vexp.h" nogil:
    void asvgd_exp_scaled(const double* src, double* dst, Py_ssize_t n, double scale)

import numpy as np

BLAS_MIN_DIM = 8


cdef void _gemm_rowmajor(const double* A, const double* B, double* C,
                         int m, int n, int k, bint trans_b, double beta) noexcept nogil:
    # Row-major C (m x n) = A (m x k) @ B (k x n), or A @ B.T if trans_b.
    # Column-major BLAS sees every row-major matrix transposed.
    cdef double one = 1.0
    cdef char tb = b'T' if trans_b else b'N'
    cdef char na = b'N'
    cdef int ldb = k if trans_b else n
    dgemm(&tb, &na, &n, &m, &k, &one, <double*>B, &ldb, <double*>A, &k, &beta, C, &n)


cdef inline double _sqdist_row(const double* a, const double* b, Py_ssize_t d) noexcept nogil:
    cdef Py_ssize_t k
    cdef double acc = 0.0, diff
    for k in range(d):
        diff = a[k] - b[k]
        acc += diff * diff
    return acc


def cross_sqdist(const double[:, ::1] X, const double[:, ::1] Y):
    """Full (n, m) matrix of squared Euclidean distances between rows of X and Y."""
    cdef Py_ssize_t n = X.shape[0], m = Y.shape[0], d = X.shape[1]
    cdef Py_ssize_t i, j
    cdef double v
    out = np.zeros((n, m), dtype=np.float64)
    if n == 0 or m == 0:
        return out
    cdef double[:, ::1] D = out
    if d < BLAS_MIN_DIM:
        for i in prange(n, nogil=True, schedule="static"):
            for j in range(m):
                D[i, j] = _sqdist_row(&X[i, 0], &Y[j, 0], d)
        return out
    nx = np.einsum("ij,ij->i", X, X)
    ny = np.einsum("ij,ij->i", Y, Y)
    cdef double[::1] NX = nx
    cdef double[::1] NY = ny
    with nogil:
        _gemm_rowmajor(&X[0, 0], &Y[0, 0], &D[0, 0], <int>n, <int>m, <int>d, True, 0.0)
    for i in prange(n, nogil=True, schedule="static"):
        for j in range(m):
            v = NX[i] + NY[j] - 2.0 * D[i, j]
            D[i, j] = v if v > 0.0 else 0.0
    return out


def condensed_sqdist(const double[:, ::1] X):
    """Squared pairwise distances, condensed upper triangle in row-major order."""
    cdef Py_ssize_t n = X.shape[0], d = X.shape[1]
    cdef Py_ssize_t i, j, base
    cdef double v
    out = np.empty(n * (n - 1) // 2, dtype=np.float64)
    if n < 2:
        return out
    cdef double[::1] C = out
    cdef double[:, ::1] F
    if d < BLAS_MIN_DIM:
        for i in prange(n, nogil=True, schedule="dynamic"):
            base = i * n - i * (i + 1) // 2 - i - 1
            for j in range(i + 1, n):
                C[base + j] = _sqdist_row(&X[i, 0], &X[j, 0], d)
        return out
    F = cross_sqdist(X, X)
    for i in prange(n, nogil=True, schedule="dynamic"):
        base = i * n - i * (i + 1) // 2 - i - 1
        for j in range(i + 1, n):
            C[base + j] = F[i, j]
    return out


def rbf_gram(const double[::1] D2, Py_ssize_t n, double h):
    """Symmetric kernel matrix exp(-D2 / h) from condensed squared distances."""
    cdef Py_ssize_t i, j, base
    cdef double scale = -1.0 / h
    out = np.empty((n, n), dtype=np.float64)
    cdef double[:, ::1] K = out
    for i in prange(n, nogil=True, schedule="dynamic"):
        K[i, i] = 1.0
        if i + 1 < n:
            base = i * n - i * (i + 1) // 2 - i - 1
            asvgd_exp_scaled(&D2[base + i + 1], &K[i, i + 1], n - i - 1, scale)
    # mirror the upper triangle in tiles to stay cache friendly
    cdef Py_ssize_t ib, jb, i1, j1
    for ib in prange(0, n, 64, nogil=True, schedule="dynamic"):
        i1 = ib + 64 if ib + 64 < n else n
        for jb in range(ib, n, 64):
            j1 = jb + 64 if jb + 64 < n else n
            for i in range(ib, i1):
                for j in range(jb if jb > i else i + 1, j1):
                    K[j, i] = K[i, j]
    return out


def svgd_forces(const double[:, ::1] X, const double[:, ::1] S,
                const double[:, ::1] K, double h, double gamma,
                double[:, ::1] drive, double[:, ::1] repulse):
    """Fill ``drive`` and ``repulse`` with the two halves of the SVGD direction.

    drive[i]   = gamma / n * sum_j K[i, j] s_j
    repulse[i] = 1 / n * sum_j grad_{x_j} k(x_j, x_i)
               = 2 / (h n) * sum_j K[i, j] (x_i - x_j)
    """
    cdef Py_ssize_t n = X.shape[0], d = X.shape[1]
    cdef Py_ssize_t i, j, k
    cdef double cd = gamma / n
    cdef double cr = 2.0 / (h * n)
    cdef double rowsum
    if n == 0 or d == 0:
        return
    # sum_j K_ij (x_i - x_j) = x_i * rowsum_i - (K @ X)_i
    with nogil:
        _gemm_rowmajor(&K[0, 0], &S[0, 0], &drive[0, 0], <int>n, <int>d, <int>n, False, 0.0)
        _gemm_rowmajor(&K[0, 0], &X[0, 0], &repulse[0, 0], <int>n, <int>d, <int>n, False, 0.0)
    for i in prange(n, nogil=True, schedule="static"):
        rowsum = 0.0
        for j in range(n):
            rowsum = rowsum + K[i, j]
        for k in range(d):
            drive[i, k] = cd * drive[i, k]
            repulse[i, k] = cr * (X[i, k] * rowsum - repulse[i, k])


def kernel_sum(const double[:, ::1] X, const double[:, ::1] Y, double h, bint skip_diagonal):
    """Sum of exp(-|x_i - y_j|^2 / h) over all pairs, optionally excluding i == j."""
    cdef Py_ssize_t n = X.shape[0], m = Y.shape[0]
    cdef Py_ssize_t i, j
    cdef double row
    cdef double scale = -1.0 / h
    cdef double[:, ::1] D = cross_sqdist(X, Y)
    rows = np.empty(n, dtype=np.float64)
    cdef double[::1] R = rows
    for i in prange(n, nogil=True, schedule="static"):
        if m > 0:
            asvgd_exp_scaled(&D[i, 0], &D[i, 0], m, scale)
        row = 0.0
        for j in range(m):
            if skip_diagonal and i == j:
                continue
            row = row + D[i, j]
        R[i] = row
    # row totals are combined serially for a thread-count independent result
    cdef double total = 0.0
    for i in range(n):
        total += R[i]
    return total
