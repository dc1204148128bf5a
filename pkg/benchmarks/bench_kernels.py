"""Compare the compiled kernels against the pure-numpy fallback.

Runs the two hot kernels (grid objective evaluation and replica gap
evolution) on representative problem sizes, checks that both backends
agree, and prints per-call timings with the speedup.

Usage: python benchmarks/bench_kernels.py [--repeats N]
"""
import argparse
import time

import numpy as np

from uba_sched import _kernels_py

try:
    from uba_sched import _kernels
except ImportError:
    _kernels = None


def best_of(repeats, fn, *args):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def bench_grid_objective(repeats):
    rng = np.random.default_rng(0)
    etas = rng.uniform(0.05, 1.0, size=64)
    lambdas = np.linspace(0.2, 10.0, 4096)
    ref = _kernels_py.log_objective_grid(etas, lambdas)
    rows = [("numpy", best_of(repeats, _kernels_py.log_objective_grid,
                              etas, lambdas))]
    if _kernels is not None:
        got = _kernels.log_objective_grid(etas, lambdas)
        assert np.allclose(got, ref, rtol=1e-12, atol=1e-12, equal_nan=True)
        rows.append(("cython", best_of(repeats, _kernels.log_objective_grid,
                                       etas, lambdas)))
    return "log_objective_grid (64 steps x 4096 lambdas)", rows


def bench_evolve_gaps(repeats):
    rng = np.random.default_rng(1)
    replicas, steps, dirs = 1024, 200, 4
    rates = rng.uniform(0.0, 0.25, size=steps)
    lambdas = np.array([1.0, 2.0, 3.0, 4.0])
    noise_amp = 0.1 * np.sqrt(lambdas)
    noise = rng.standard_normal((replicas, steps, dirs))
    record = np.arange(1, steps + 1, dtype=np.int64)
    init = np.ones(dirs)

    def run(kernel):
        v = np.tile(init, (replicas, 1))
        return kernel.evolve_gaps(v, rates, lambdas, noise_amp, noise, record)

    ref = run(_kernels_py)
    rows = [("numpy", best_of(repeats, run, _kernels_py))]
    if _kernels is not None:
        got = run(_kernels)
        assert np.allclose(got, ref, rtol=1e-10, atol=1e-12)
        rows.append(("cython", best_of(repeats, run, _kernels)))
    return "evolve_gaps (1024 replicas x 200 steps x 4 dirs)", rows


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=20,
                        help="timing repetitions per kernel (best-of)")
    args = parser.parse_args()

    if _kernels is None:
        print("compiled backend not built; timing the numpy fallback only")
    for title, rows in (bench_grid_objective(args.repeats),
                        bench_evolve_gaps(args.repeats)):
        print(f"\n{title}")
        base = rows[0][1]
        for name, seconds in rows:
            speedup = base / seconds if seconds else float("inf")
            print(f"  {name:>7}: {seconds * 1e3:8.3f} ms/call"
                  f"   ({speedup:4.1f}x vs numpy)")
    print("\nbackends agree within tolerance on both kernels")


if __name__ == "__main__":
    main()
