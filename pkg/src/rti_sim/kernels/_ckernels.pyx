# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
# distutils: language = c++
"""Compiled gate kernel; same contract and draw order as ``_pykernels.first_fire``."""

from cpython.pycapsule cimport PyCapsule_GetPointer
from libc.stdint cimport int64_t
from libcpp.vector cimport vector
from numpy.random cimport bitgen_t

import numpy as np


def first_fire(rng, counts, probs, seg_starts, int64_t n_ticks):
    cdef const int64_t[::1] c = np.ascontiguousarray(counts, dtype=np.int64)
    cdef const double[::1] p = np.ascontiguousarray(probs, dtype=np.float64)
    cdef const int64_t[::1] s = np.ascontiguousarray(seg_starts, dtype=np.int64)
    cdef bitgen_t *bg
    cdef vector[int64_t] hb
    cdef vector[int64_t] hi
    cdef int64_t t, e, b, i, n_seg = s.shape[0] - 1
    cdef int64_t fired_t = -1, fired_e = -1
    cdef double pb
    cdef Py_ssize_t k, n_hits

    bit_gen = rng.bit_generator
    bg = <bitgen_t *> PyCapsule_GetPointer(bit_gen.capsule, "BitGenerator")
    with bit_gen.lock, nogil:
        for t in range(n_ticks):
            for e in range(n_seg):
                for b in range(s[e], s[e + 1]):
                    pb = p[b]
                    for i in range(c[b]):
                        if bg.next_double(bg.state) < pb:
                            hb.push_back(b)
                            hi.push_back(i)
                if hb.size() > 0:
                    fired_t = t
                    fired_e = e
                    break
            if fired_t >= 0:
                break

    n_hits = hb.size()
    out_b = np.empty(n_hits, dtype=np.int64)
    out_i = np.empty(n_hits, dtype=np.int64)
    cdef int64_t[::1] ob = out_b
    cdef int64_t[::1] oi = out_i
    for k in range(n_hits):
        ob[k] = hb[k]
        oi[k] = hi[k]
    return fired_t, fired_e, out_b, out_i
