# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled implementations of the hot kernels.

Same contracts as `_kernels_py`; selected by `_backend` when importable.
"""
import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, log

cnp.import_array()

BACKEND_NAME = "cython"


def log_objective(double[::1] etas, double lam):
    cdef Py_ssize_t t, n = etas.shape[0]
    cdef double acc = 0.0
    cdef double f
    for t in range(n):
        f = fabs(1.0 - etas[t] * lam)
        if f == 0.0:
            return float("-inf")
        acc += log(f)
    return 2.0 * acc


def log_objective_grid(double[::1] etas, double[::1] lambdas):
    cdef Py_ssize_t g, t
    cdef Py_ssize_t G = lambdas.shape[0], n = etas.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(G, dtype=np.float64)
    cdef double[::1] out_v = out
    cdef double acc, f, lam
    cdef bint dead
    for g in range(G):
        lam = lambdas[g]
        acc = 0.0
        dead = False
        for t in range(n):
            f = fabs(1.0 - etas[t] * lam)
            if f == 0.0:
                dead = True
                break
            acc += log(f)
        out_v[g] = float("-inf") if dead else 2.0 * acc
    return out


def evolve_gaps(double[:, ::1] v, double[::1] rates, double[::1] lambdas,
                double[::1] noise_amp, noise, record_steps):
    cdef Py_ssize_t R = v.shape[0], N = v.shape[1], T = rates.shape[0]
    cdef cnp.ndarray[cnp.int64_t, ndim=1] rec_arr = \
        np.asarray(record_steps, dtype=np.int64)
    cdef cnp.int64_t[::1] rec = rec_arr
    cdef Py_ssize_t M = rec.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] gaps = \
        np.empty((R, M), dtype=np.float64)
    cdef double[:, :, ::1] z

    cdef Py_ssize_t t, rr, j, k
    cdef double r, acc
    cdef bint noisy = noise is not None
    if noisy:
        z = noise
    k = 0
    for t in range(1, T + 1):
        r = rates[t - 1]
        if noisy:
            for rr in range(R):
                for j in range(N):
                    v[rr, j] = (1.0 - r * lambdas[j]) * v[rr, j] \
                        - r * noise_amp[j] * z[rr, t - 1, j]
        else:
            for rr in range(R):
                for j in range(N):
                    v[rr, j] = (1.0 - r * lambdas[j]) * v[rr, j]
        if k < M and rec[k] == t:
            for rr in range(R):
                acc = 0.0
                for j in range(N):
                    acc += lambdas[j] * v[rr, j] * v[rr, j]
                gaps[rr, k] = 0.5 * acc
            k += 1
    return gaps
