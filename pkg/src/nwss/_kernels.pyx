# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels: batched principal minors and Gram log-determinants."""

import numpy as np

from libc.math cimport log, sqrt, isnan

NAME = "compiled"


cdef inline double _mag2(double complex z) noexcept nogil:
    return z.real * z.real + z.imag * z.imag


def minor_dets(const double complex[:, ::1] mat, const Py_ssize_t[:, ::1] subsets):
    """Real part of ``det(mat[s][:, s])`` for every row ``s`` of `subsets`."""
    cdef Py_ssize_t n = subsets.shape[0], k = subsets.shape[1]
    out = np.empty(n, dtype=np.float64)
    work_arr = np.empty((max(k, 1), max(k, 1)), dtype=np.complex128)
    cdef double[::1] res = out
    cdef double complex[:, ::1] w = work_arr
    cdef Py_ssize_t t, a, b, col, row, piv
    cdef double complex det, pv, f, tmp
    cdef double best, mag
    with nogil:
        for t in range(n):
            for a in range(k):
                for b in range(k):
                    w[a, b] = mat[subsets[t, a], subsets[t, b]]
            det = 1.0
            for col in range(k):
                piv = col
                best = _mag2(w[col, col])
                for row in range(col + 1, k):
                    mag = _mag2(w[row, col])
                    if mag > best:
                        best = mag
                        piv = row
                if best == 0.0:
                    det = 0.0
                    break
                if piv != col:
                    for b in range(col, k):
                        tmp = w[col, b]
                        w[col, b] = w[piv, b]
                        w[piv, b] = tmp
                    det = -det
                pv = w[col, col]
                det = det * pv
                for row in range(col + 1, k):
                    f = w[row, col] / pv
                    if f != 0:
                        for b in range(col + 1, k):
                            w[row, b] = w[row, b] - f * w[col, b]
            res[t] = det.real
    return out


def gram_logdet(const double complex[:, :, ::1] G, double mu):
    """Natural ``log det(I + mu G^H G)`` per matrix via complex Cholesky.

    The Gram matrix is formed on the smaller side of each ``M x K`` slice.
    Entries that fail to factor come back as NaN.
    """
    cdef Py_ssize_t n = G.shape[0], M = G.shape[1], K = G.shape[2]
    cdef bint cols = K <= M
    cdef Py_ssize_t d = K if cols else M
    cdef Py_ssize_t inner = M if cols else K
    out = np.empty(n, dtype=np.float64)
    c_arr = np.empty((max(d, 1), max(d, 1)), dtype=np.complex128)
    cdef double[::1] res = out
    cdef double complex[:, ::1] c = c_arr
    cdef Py_ssize_t t, a, b, m, p
    cdef double complex acc
    cdef double diag, total
    with nogil:
        for t in range(n):
            # lower triangle of I + mu * Gram
            for a in range(d):
                for b in range(a + 1):
                    acc = 0.0
                    if cols:
                        for m in range(inner):
                            acc = acc + G[t, m, a] * G[t, m, b].conjugate()
                    else:
                        for m in range(inner):
                            acc = acc + G[t, a, m] * G[t, b, m].conjugate()
                    c[a, b] = mu * acc
                c[a, a] = c[a, a] + 1.0
            total = 0.0
            for b in range(d):
                diag = c[b, b].real
                for p in range(b):
                    diag = diag - _mag2(c[b, p])
                if not diag > 0.0:
                    total = 0.0 / 0.0
                    break
                diag = sqrt(diag)
                c[b, b] = diag
                total = total + log(diag)
                for a in range(b + 1, d):
                    acc = c[a, b]
                    for p in range(b):
                        acc = acc - c[a, p] * c[b, p].conjugate()
                    c[a, b] = acc / diag
            res[t] = 2.0 * total
    return out
