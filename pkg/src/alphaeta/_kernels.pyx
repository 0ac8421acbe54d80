# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: batched LFSR expansion and likelihood accumulation."""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport uint64_t, int64_t

cnp.import_array()


cdef extern from *:
    """
    #if defined(__GNUC__) || defined(__clang__)
    #define AE_PARITY(x) ((unsigned long long)__builtin_parityll(x))
    #else
    static inline unsigned long long AE_PARITY(unsigned long long x) {
        x ^= x >> 32; x ^= x >> 16; x ^= x >> 8; x ^= x >> 4; x ^= x >> 2; x ^= x >> 1;
        return x & 1;
    }
    #endif
    """
    uint64_t AE_PARITY(uint64_t x) nogil


def lfsr_basis(const uint64_t[::1] seeds, uint64_t mask, int L, Py_ssize_t n_symbols,
               int width):
    cdef Py_ssize_t C = seeds.shape[0]
    out_arr = np.empty((C, n_symbols), dtype=np.int64)
    cdef int64_t[:, ::1] out = out_arr
    cdef uint64_t full = ((<uint64_t>1) << L) - 1
    cdef int top = L - 1
    cdef uint64_t s, k
    cdef Py_ssize_t c, q
    cdef int b
    with nogil:
        for c in range(C):
            s = seeds[c]
            for q in range(n_symbols):
                k = 0
                for b in range(width):
                    k = (k << 1) | (s >> top)
                    s = ((s << 1) | AE_PARITY(s & mask)) & full
                out[c, q] = <int64_t>k
    return out_arr


def cumulative_gather(const double[:, ::1] table, const int64_t[:, ::1] idx):
    cdef Py_ssize_t C = idx.shape[0]
    cdef Py_ssize_t n = idx.shape[1]
    out_arr = np.empty((C, n), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef double acc
    cdef Py_ssize_t c, q
    with nogil:
        for c in range(C):
            acc = 0.0
            for q in range(n):
                acc += table[q, idx[c, q]]
                out[c, q] = acc
    return out_arr
