"""Numpy implementations of the hot kernels.

Mirrors `_kernels.pyx`; loaded by `_backend` when the compiled extension is
unavailable or explicitly disabled.
"""
import numpy as np

BACKEND_NAME = "numpy"


def log_objective(etas, lam):
    """Sum of 2*ln|1 - eta_t * lam|; -inf when any factor is exactly zero."""
    etas = np.ascontiguousarray(etas, dtype=np.float64)
    with np.errstate(divide="ignore"):
        return float(2.0 * np.log(np.abs(1.0 - etas * lam)).sum())


def log_objective_grid(etas, lambdas):
    """log_objective evaluated at every lambda of a grid; shape (G,)."""
    etas = np.ascontiguousarray(etas, dtype=np.float64)
    lambdas = np.ascontiguousarray(lambdas, dtype=np.float64)
    with np.errstate(divide="ignore"):
        return 2.0 * np.log(np.abs(1.0 - np.outer(lambdas, etas))).sum(axis=1)


def evolve_gaps(v, rates, lambdas, noise_amp, noise, record_steps):
    """Evolve replica deviation coordinates and record loss gaps.

    v: (R, N) initial coordinates, modified in place.
    rates: (T,) per-step rates. lambdas: (N,) eigenvalues.
    noise_amp: (N,) per-direction noise amplitude (sigma * sqrt(lambda)).
    noise: (R, T, N) standard normal draws, or None for the noiseless path.
    record_steps: ascending 1-indexed steps at which to record gaps.
    Returns gaps with shape (R, len(record_steps)).
    """
    rates = np.asarray(rates, dtype=np.float64)
    lambdas = np.asarray(lambdas, dtype=np.float64)
    noise_amp = np.asarray(noise_amp, dtype=np.float64)
    record_steps = np.asarray(record_steps, dtype=np.int64)
    R = v.shape[0]
    gaps = np.empty((R, len(record_steps)), dtype=np.float64)
    rec = 0
    with np.errstate(over="ignore", invalid="ignore"):
        for t in range(1, len(rates) + 1):
            r = rates[t - 1]
            v *= 1.0 - r * lambdas
            if noise is not None:
                v -= r * noise_amp * noise[:, t - 1, :]
            if rec < len(record_steps) and record_steps[rec] == t:
                gaps[:, rec] = 0.5 * (lambdas * v * v).sum(axis=1)
                rec += 1
    return gaps
