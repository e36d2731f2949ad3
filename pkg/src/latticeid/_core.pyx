# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels; see ``_pycore.py`` for the reference implementations."""
import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin

cnp.import_array()


def katti_recursion(p, Py_ssize_t degree):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] src = np.ascontiguousarray(p, dtype=np.float64)
    cdef double[::1] pad = np.zeros(degree + 1)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] q = np.zeros(degree + 1)
    cdef double[::1] kq = np.zeros(degree + 1)
    cdef Py_ssize_t n, k, m = min(src.shape[0], degree + 1)
    cdef double acc, p0
    for n in range(m):
        pad[n] = src[n]
    p0 = pad[0]
    for n in range(1, degree + 1):
        acc = 0.0
        for k in range(1, n):
            acc += kq[k] * pad[n - k]
        kq[n] = (n * pad[n] - acc) / p0
        q[n] = kq[n] / n
    return q


def series_quotient(num, den, shape):
    cdef const double[::1] N = np.ascontiguousarray(num, dtype=np.float64).reshape(-1)
    cdef const double[::1] D = np.ascontiguousarray(den, dtype=np.float64).reshape(-1)
    cdef Py_ssize_t size = N.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.zeros(size)
    cdef double[::1] R = out
    cdef Py_ssize_t[:, ::1] coords = np.ascontiguousarray(
        np.stack(np.unravel_index(np.arange(size), tuple(shape)), axis=1).astype(np.intp)
    )
    # only the nonzero non-constant terms of den contribute
    cdef Py_ssize_t[::1] terms = np.flatnonzero(np.asarray(D)[1:]).astype(np.intp) + 1
    cdef Py_ssize_t nterms = terms.shape[0]
    cdef Py_ssize_t dim = coords.shape[1]
    cdef Py_ssize_t n, t, m, i
    cdef bint below
    cdef double acc, d0 = D[0]
    for n in range(size):
        acc = 0.0
        # row-major order: m <= n componentwise implies flat(n - m) = flat(n) - flat(m)
        for t in range(nterms):
            m = terms[t]
            if m > n:
                break
            below = True
            for i in range(dim):
                if coords[m, i] > coords[n, i]:
                    below = False
                    break
            if below:
                acc += D[m] * R[n - m]
        R[n] = (N[n] - acc) / d0
    return out


def charfn_direct(points, masses, z):
    cdef const double[:, ::1] P = np.ascontiguousarray(points, dtype=np.float64)
    cdef const double[::1] w = np.ascontiguousarray(masses, dtype=np.float64)
    cdef const double[:, ::1] Z = np.ascontiguousarray(np.atleast_2d(z), dtype=np.float64)
    cdef Py_ssize_t K = Z.shape[0], N = P.shape[0], dim = P.shape[1]
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] out = np.empty(K, dtype=np.complex128)
    cdef Py_ssize_t k, n, i
    cdef double phase, re, im
    for k in range(K):
        re = 0.0
        im = 0.0
        for n in range(N):
            phase = 0.0
            for i in range(dim):
                phase += P[n, i] * Z[k, i]
            re += w[n] * cos(phase)
            im += w[n] * sin(phase)
        out[k] = re + 1j * im
    return out
