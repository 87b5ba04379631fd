# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled Monte Carlo kernel: per-step minimum over ``cores`` fresh draws.

Reads raw 64-bit words straight from a NumPy ``BitGenerator`` so that the
uniform stream matches ``cpcsim.rng.raw_to_uniform`` exactly. The minimum is
taken on the uniforms wherever the transform is monotone, so most steps need
one or two ``log`` calls instead of one per draw.
"""

import numpy as np
cimport numpy as cnp
from cpython.pycapsule cimport PyCapsule_GetPointer
from libc.math cimport log
from libc.stdint cimport uint64_t
from numpy.random cimport bitgen_t

cnp.import_array()

cdef double INV_2_52 = 1.0 / 4503599627370496.0
# uniforms multiplied before each log; 16 * 53 bits stays above the normal range
cdef long ERLANG_GROUP = 16

cdef enum:
    EXPONENTIAL = 0
    ERLANG = 1
    HYPEREXPONENTIAL = 2
    UNIFORM = 3


cdef inline double _open_uniform(bitgen_t *bg) noexcept nogil:
    return (<double>(bg.next_uint64(bg.state) >> 12) + 0.5) * INV_2_52


cdef inline double _erlang_log_sum(bitgen_t *bg, long k) noexcept nogil:
    cdef double acc = 0.0, prod = 1.0
    cdef long j
    for j in range(k):
        prod *= _open_uniform(bg)
        if (j + 1) % ERLANG_GROUP == 0:
            acc += log(prod)
            prod = 1.0
    if k % ERLANG_GROUP:
        acc += log(prod)
    return acc


def sample_minima(object bit_generator, int kind, long k, double p0, double p1,
                  Py_ssize_t steps, Py_ssize_t cores):
    """Return ``(minima, firsts)``: per step, the minimum of ``cores`` draws
    and the draw of core 0."""
    cdef bitgen_t *bg = <bitgen_t *> PyCapsule_GetPointer(bit_generator.capsule, "BitGenerator")
    minima = np.empty(steps, dtype=np.float64)
    firsts = np.empty(steps, dtype=np.float64)
    cdef double[::1] mv = minima
    cdef double[::1] fv = firsts
    cdef Py_ssize_t i, c
    cdef double u, u0, best, first, branch, fast, slow, x_fast, x_slow, acc
    if kind < EXPONENTIAL or kind > UNIFORM:
        raise ValueError(f"unknown family code {kind}")
    with bit_generator.lock, nogil:
        for i in range(steps):
            if kind == EXPONENTIAL:
                u0 = _open_uniform(bg)
                best = u0
                for c in range(1, cores):
                    u = _open_uniform(bg)
                    if u > best:
                        best = u
                fv[i] = -log(u0) / p0
                mv[i] = -log(best) / p0
            elif kind == ERLANG:
                acc = _erlang_log_sum(bg, k)
                first = acc
                best = acc
                for c in range(1, cores):
                    acc = _erlang_log_sum(bg, k)
                    if acc > best:
                        best = acc
                fv[i] = -first / p0
                mv[i] = -best / p0
            elif kind == HYPEREXPONENTIAL:
                fast = 0.0
                slow = 0.0
                for c in range(cores):
                    branch = _open_uniform(bg)
                    u = _open_uniform(bg)
                    if branch < 0.5:
                        if c == 0:
                            fv[i] = -log(u) / p0
                        if u > fast:
                            fast = u
                    else:
                        if c == 0:
                            fv[i] = -log(u) / p1
                        if u > slow:
                            slow = u
                x_fast = -log(fast) / p0
                x_slow = -log(slow) / p1
                mv[i] = x_fast if x_fast < x_slow else x_slow
            else:
                u0 = _open_uniform(bg)
                best = u0
                for c in range(1, cores):
                    u = _open_uniform(bg)
                    if u < best:
                        best = u
                fv[i] = p0 + (p1 - p0) * u0
                mv[i] = p0 + (p1 - p0) * best
    return minima, firsts
