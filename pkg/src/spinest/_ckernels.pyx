# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled trial kernel; same draws and arithmetic order as ``_pykernels``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin, sqrt, M_PI
from libc.stdint cimport uint64_t, int64_t

cnp.import_array()

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15ULL
cdef uint64_t TRIAL_STEP = 0xD1B54A32D192ED03ULL
cdef double TO_UNIT = 1.0 / 9007199254740992.0  # 2**-53


cdef inline uint64_t mix64(uint64_t z) noexcept nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline double draw(uint64_t tk, uint64_t j) noexcept nogil:
    return <double>(mix64(tk + (j + 1) * GOLDEN) >> 11) * TO_UNIT


def simulate(key, Py_ssize_t trial_start, Py_ssize_t n_trials,
             const double[:, ::1] effects, const int64_t[::1] group_offsets,
             const int64_t[::1] group_copies, const int64_t[:, ::1] effect_up):
    cdef uint64_t k = <uint64_t>int(key)
    cdef Py_ssize_t n_axes = effect_up.shape[1]
    cdef Py_ssize_t n_groups = group_copies.shape[0]
    cdef Py_ssize_t n_eff = effects.shape[0]
    states_arr = np.empty((n_trials, 3), dtype=np.float64)
    ups_arr = np.zeros((n_trials, n_axes), dtype=np.int64)
    cum_arr = np.empty(n_eff, dtype=np.float64)
    cdef double[:, ::1] states = states_arr
    cdef int64_t[:, ::1] ups = ups_arr
    cdef double[::1] cum = cum_arr
    cdef Py_ssize_t t, g, e, lo, hi, a
    cdef int64_t c
    cdef uint64_t tk, j
    cdef double x, y, z, phi, s, p, acc, u

    with nogil:
        for t in range(n_trials):
            tk = mix64(k + (<uint64_t>(trial_start + t) + 1) * TRIAL_STEP)
            z = 2.0 * draw(tk, 0) - 1.0
            phi = 2.0 * M_PI * draw(tk, 1)
            s = 1.0 - z * z
            s = sqrt(s if s > 0.0 else 0.0)
            x = s * cos(phi)
            y = s * sin(phi)
            states[t, 0] = x
            states[t, 1] = y
            states[t, 2] = z
            j = 2
            for g in range(n_groups):
                lo = group_offsets[g]
                hi = group_offsets[g + 1]
                acc = 0.0
                for e in range(lo, hi):
                    p = ((effects[e, 0] + effects[e, 1] * x) + effects[e, 2] * y) + effects[e, 3] * z
                    if p < 0.0:
                        p = 0.0
                    acc = acc + p
                    cum[e] = acc
                for c in range(group_copies[g]):
                    u = draw(tk, j) * acc
                    j += 1
                    e = lo
                    while e < hi - 1 and cum[e] <= u:
                        e += 1
                    for a in range(n_axes):
                        ups[t, a] += effect_up[e, a]
    return states_arr, ups_arr
