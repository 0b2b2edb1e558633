# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the kernels in ``_kernels_py``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, lgamma, log
from libc.stdint cimport uint64_t, int64_t

cnp.import_array()

cdef uint64_t GAMMA = 0x9E3779B97F4A7C15ULL
cdef uint64_t MIX1 = 0xBF58476D1CE4E5B9ULL
cdef uint64_t MIX2 = 0x94D049BB133111EBULL
cdef uint64_t LANES = 4


cdef inline uint64_t _mix(uint64_t z) nogil:
    z = (z ^ (z >> 30)) * MIX1
    z = (z ^ (z >> 27)) * MIX2
    return z ^ (z >> 31)


def stream_key(object seed, object stream):
    cdef uint64_t s = <uint64_t>(int(seed) & 0xFFFFFFFFFFFFFFFF)
    cdef uint64_t t = <uint64_t>(int(stream) & 0xFFFFFFFFFFFFFFFF)
    return int(_mix(s + _mix((t + 1) * GAMMA)))


def random_words(object seed, object stream, Py_ssize_t start, Py_ssize_t count, int lane):
    cdef uint64_t key = <uint64_t>stream_key(seed, stream)
    cdef cnp.ndarray[cnp.uint64_t, ndim=1] out = np.empty(count, dtype=np.uint64)
    cdef Py_ssize_t i
    with nogil:
        for i in range(count):
            out[i] = _mix(key + (<uint64_t>(start + i) * LANES + <uint64_t>(lane + 1)) * GAMMA)
    return out


def uniforms(object seed, object stream, Py_ssize_t start, Py_ssize_t count, int lane):
    cdef uint64_t key = <uint64_t>stream_key(seed, stream)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(count, dtype=np.float64)
    cdef Py_ssize_t i
    cdef uint64_t w
    with nogil:
        for i in range(count):
            w = _mix(key + (<uint64_t>(start + i) * LANES + <uint64_t>(lane + 1)) * GAMMA)
            out[i] = <double>(w >> 11) * (1.0 / 9007199254740992.0)
    return out


def sample_counts(cdf_in, u_in):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] cdf = np.ascontiguousarray(cdf_in, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] u = np.ascontiguousarray(u_in, dtype=np.float64)
    cdef Py_ssize_t n = u.shape[0], m = cdf.shape[0]
    cdef cnp.ndarray[cnp.int64_t, ndim=1] out = np.empty(n, dtype=np.int64)
    cdef Py_ssize_t i, lo, hi, mid
    cdef double v
    with nogil:
        for i in range(n):
            v = u[i]
            lo = 0
            hi = m
            # first index with cdf[idx] > v
            while lo < hi:
                mid = (lo + hi) >> 1
                if cdf[mid] <= v:
                    lo = mid + 1
                else:
                    hi = mid
            out[i] = lo
    return out


cdef void _laguerre(int nmax, double k, double x, double* out) nogil:
    cdef int n
    out[0] = 1.0
    if nmax >= 1:
        out[1] = 1.0 + k - x
    for n in range(1, nmax):
        out[n + 1] = ((2 * n + k + 1 - x) * out[n] - (n + k) * out[n - 1]) / (n + 1)


def laguerre_table(int nmax, double k, double x):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(nmax + 1, dtype=np.float64)
    _laguerre(nmax, k, x, &out[0])
    return out


def displacement_real(double r, int dim):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.zeros((dim, dim), dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] lag = np.empty(dim, dtype=np.float64)
    cdef int k, m, n
    cdef double x, g, lr, val
    if r == 0.0:
        for k in range(dim):
            out[k, k] = 1.0
        return out
    x = r * r
    g = exp(-0.5 * x)
    lr = log(r)
    with nogil:
        for k in range(dim):
            _laguerre(dim - 1 - k, <double>k, x, &lag[0])
            for m in range(dim - k):
                n = m + k
                val = g * exp(0.5 * (lgamma(m + 1) - lgamma(n + 1)) + k * lr) * lag[m]
                out[n, m] = val
                if k:
                    out[m, n] = -val if (k & 1) else val
    return out
