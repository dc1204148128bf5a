"""Acceptance gate: one criterion per test, one pass/fail line each.

Every test computes an ok flag plus a one-line detail, prints the verdict,
then asserts, so a run with ``-s`` (or the captured output of a failure)
always shows the per-criterion status including the measured margin and
elapsed time.  Tolerances and runtime ceilings are part of the contract;
do not loosen them.
"""
import json
import math
import time

import numpy as np

from uba_sched.bounds import BoundInputs, bound_sweep, theorem1_bound
from uba_sched.fitting import fit_parametric
from uba_sched.minmax import (
    MinMaxProblem,
    chebyshev_objective,
    chebyshev_steps,
    scaled_uba_steps,
    solve_minmax,
    worst_case_objective,
)
from uba_sched.schedule import PhasePlan, ScheduleSpec, baseline_rate, trace
from uba_sched.simulate import QuadModel, compare_schedules, simulate


def _report(num: int, name: str, ok: bool, detail: str,
            elapsed: float, limit: float) -> None:
    timed_ok = ok and elapsed < limit
    status = "PASS" if timed_ok else "FAIL"
    print(f"[criterion {num:2d}] {status}: {name} ({detail}; "
          f"{elapsed:.2f}s < {limit:g}s)")
    assert timed_ok, f"criterion {num} failed: {detail}, elapsed {elapsed:.2f}s"


def uba_spec(n, phi, eta_lo, eta_hi):
    plan = PhasePlan(boundaries=(0, n), phi=(phi,), eta_max=(eta_hi,))
    return ScheduleSpec(kind="UBA", total_steps=n, eta_min=eta_lo, plan=plan)


def test_criterion_01_chebyshev_identity():
    start = time.perf_counter()
    worst = 0.0
    for kappa in (1.1, 2.0, 10.0, 100.0):
        for n in range(1, 65):
            scaled = scaled_uba_steps(n, 1.0, kappa)
            closed = chebyshev_steps(n, 1.0, kappa)
            worst = max(worst, max(abs(a - b) for a, b in zip(scaled, closed)))
    _report(1, "scaled form equals Chebyshev steps", worst <= 1e-12,
            f"max pointwise deviation {worst:.3e} <= 1e-12",
            time.perf_counter() - start, 1.0)


def test_criterion_02_minimax_optimality():
    start = time.perf_counter()
    worst_gap = 0.0
    for n in range(1, 17):
        _, value = worst_case_objective(chebyshev_steps(n, 1.0, 10.0), 1.0, 10.0)
        worst_gap = max(worst_gap, abs(value - chebyshev_objective(n, 1.0, 10.0)))
    ok = worst_gap <= 1e-9

    rng = np.random.default_rng(2024)
    optimum = chebyshev_objective(8, 1.0, 10.0)
    lowest = math.inf
    for _ in range(1000):
        etas = rng.uniform(0.1, 1.0, size=8)
        _, value = worst_case_objective(etas, 1.0, 10.0)
        lowest = min(lowest, value)
    ok = ok and lowest >= optimum - 1e-9
    _report(2, "Chebyshev steps are minimax optimal", ok,
            f"oracle gap {worst_gap:.3e}, random-vector slack "
            f"{lowest - optimum:.3e} >= -1e-9",
            time.perf_counter() - start, 5.0)


def test_criterion_03_solver_quality():
    start = time.perf_counter()
    worst_rel = 0.0
    for n in (2, 4, 8):
        problem = MinMaxProblem(n_steps=n, lambda_lo=1.0, lambda_hi=10.0,
                                eta_lo=0.0, eta_hi=1.0)
        solution = solve_minmax(problem)
        optimum = chebyshev_objective(n, 1.0, 10.0)
        worst_rel = max(worst_rel,
                        abs(solution.log_objective - optimum) / abs(optimum))
    _report(3, "solver reaches the Chebyshev optimum", worst_rel <= 0.01,
            f"worst relative log gap {worst_rel:.2e} <= 1e-2",
            time.perf_counter() - start, 60.0)


def test_criterion_04_cosine_reduction():
    start = time.perf_counter()
    ok = True
    details = []
    for n in (10, 100, 1000):
        uba = trace(uba_spec(n, 2.0, 0.0, 1.0)).rates
        cosine = trace(ScheduleSpec(kind="Cosine", total_steps=n, eta_min=0.0,
                                    baseline_params={"eta0": 1.0})).rates
        gap = max(abs(a - b) for a, b in zip(uba, cosine))
        limit = 1.0 * math.sin(math.pi / (2 * n))
        ok = ok and gap <= limit
        details.append(f"n={n}: {gap:.2e}<={limit:.2e}")
    _report(4, "phi=2 reduces to the shifted cosine", ok,
            "; ".join(details), time.perf_counter() - start, 1.0)


def test_criterion_05_lemma1_domination():
    start = time.perf_counter()
    rows = bound_sweep(phis=(0.5, 1.0, 3.0, 5.0, 10.0), ns=(10, 100),
                       lambdas=np.linspace(0.2, 1.0, 33),
                       eta_lo=0.0, eta_hi=1.0)
    worst = math.inf
    ok = True
    for _, _, _, _, log_exact, log_bound, margin in rows:
        exact = math.exp(log_exact)
        bound = math.exp(min(log_bound, 709.0))
        ok = ok and exact <= bound + 1e-12
        worst = min(worst, margin)
    _report(5, "contraction bound dominates the exact product", ok,
            f"{len(rows)} grid rows, worst log margin {worst:+.3f}",
            time.perf_counter() - start, 10.0)


def test_criterion_06_theorem1_validation():
    start = time.perf_counter()
    spectrum = (1.0, 2.0, 4.0)
    worst_margin = math.inf
    ok = True
    for n in (50, 200):
        for phi in (0.5, 1.0, 3.0, 5.0):
            model = QuadModel(spectrum=spectrum, init_coeffs=(1.0, 1.0, 1.0),
                              sigma=0.1, seed=1234)
            stats = simulate(model, uba_spec(n, phi, 0.0, 0.25),
                             steps=n, replicas=1024)
            for k, t in enumerate(stats.steps):
                inputs = BoundInputs(
                    n=n, phi=phi, eta_lo=0.0, eta_hi=0.25, lambda_lo=1.0,
                    lambda_hi=4.0, t_rel=t, sigma=0.1, spectrum=spectrum,
                    init_dist_sq=3.0)
                bias, var = theorem1_bound(inputs)
                rhs = bias + var + 3.0 * stats.stderr_gap[k]
                ok = ok and stats.mean_gap[k] <= rhs
                if stats.mean_gap[k] > 0.0:
                    worst_margin = min(worst_margin,
                                       math.log(rhs / stats.mean_gap[k]))
    _report(6, "Monte-Carlo gap stays under the bias+variance bound", ok,
            f"worst log margin {worst_margin:+.3f} over "
            "phi in {0.5,1,3,5} x n in {50,200}",
            time.perf_counter() - start, 120.0)


def test_criterion_07_deterministic_simulator():
    start = time.perf_counter()
    model = QuadModel(spectrum=(1.0, 2.0, 4.0), init_coeffs=(1.0, 0.5, 2.0),
                      sigma=0.0, seed=0)
    spec = uba_spec(100, 4.0, 0.05, 0.8)
    stats = simulate(model, spec, steps=100, replicas=1)
    lam = np.asarray(model.spectrum)
    v = np.asarray(model.init_coeffs, dtype=float)
    worst_rel = 0.0
    rates = trace(spec).rates
    for k, t in enumerate(stats.steps):
        v_t = v * np.prod([1.0 - r * lam for r in rates[:t]], axis=0)
        expected = 0.5 * float((lam * v_t * v_t).sum())
        worst_rel = max(worst_rel,
                        abs(stats.mean_gap[k] - expected) / expected)
    _report(7, "noiseless simulation equals the analytic product",
            worst_rel <= 1e-10, f"worst relative deviation {worst_rel:.3e}",
            time.perf_counter() - start, 1.0)


def test_criterion_08_fit_self_consistency():
    start = time.perf_counter()
    ok = True
    details = []
    for phi in (0.5, 1.0, 2.0, 5.0, 10.0):
        rates = trace(uba_spec(50, phi, 0.0, 1.0)).rates
        fit = fit_parametric(rates, 0.0, 1.0, 50)
        rel = abs(fit.phi - phi) / phi
        ok = ok and rel <= 0.05 and fit.relation_error < 1e-6
        details.append(f"phi={phi:g}: rel {rel:.1e}")

    # reference row: rate curve 0.26*u/(0.51 + 0.00*u) on the half-step
    # cosine grid; the recovered shape ratio must land within 0.05 of 1.99
    a, b, c = 0.26, 0.51, 0.00
    grid = 1.0 + np.cos((2.0 * np.arange(1, 101) - 1.0) * math.pi / 200.0)
    values = a * grid / (b + c * grid)
    fit = fit_parametric(values, 0.0, 1.0, 100)
    gap = abs(fit.phi - 1.99)
    ok = ok and gap <= 0.05
    details.append(f"reference params: |phi-1.99|={gap:.3f}")
    _report(8, "fits recover the generating phi", ok, "; ".join(details),
            time.perf_counter() - start, 30.0)


def test_criterion_09_baseline_fidelity():
    start = time.perf_counter()
    eta0 = 0.8
    step = ScheduleSpec(kind="Step", total_steps=100,
                        baseline_params={"eta0": eta0})
    ok = (baseline_rate(step, 25) == eta0
          and baseline_rate(step, 60) == eta0 * 0.1
          and baseline_rate(step, 80) == eta0 * 0.01)
    ok = ok and set(trace(step).rates) == {eta0, eta0 * 0.1, eta0 * 0.01}

    linear = ScheduleSpec(kind="LinearBT", total_steps=100,
                          baseline_params={"eta0": eta0})
    ok = ok and math.isclose(baseline_rate(linear, 50), eta0 / 2, rel_tol=1e-15)

    rex = ScheduleSpec(kind="REX", total_steps=100,
                       baseline_params={"eta0": eta0})
    ok = ok and baseline_rate(rex, 0) == eta0
    ok = ok and math.isclose(baseline_rate(rex, 50), eta0 * 2.0 / 3.0,
                             rel_tol=1e-15)
    _report(9, "baseline closed forms hit their anchor values", ok,
            "Step segments exact; LinearBT(T/2)=eta0/2; REX(0)=eta0, "
            "REX(T/2)=(2/3)eta0", time.perf_counter() - start, 1.0)


def test_criterion_10_budget_comparison():
    start = time.perf_counter()
    spectrum = tuple(np.linspace(1.0, 10.0, 129))
    ok = True
    details = []
    for budget in (16, 64, 256):
        model = QuadModel(spectrum=spectrum, init_coeffs=(1.0,) * 129,
                          sigma=0.0, seed=0)
        uba = uba_spec(budget, 20.0, 0.1, 1.0)  # phi = 2*kappa
        cosine = ScheduleSpec(kind="Cosine", total_steps=budget, eta_min=0.1,
                              baseline_params={"eta0": 1.0})
        linear = ScheduleSpec(kind="LinearBT", total_steps=budget,
                              baseline_params={"eta0": 1.0})
        rows = compare_schedules(model, [uba, cosine, linear],
                                 steps=budget, replicas=1)
        ok = (ok and rows[0].worst_contraction_log <= rows[1].worst_contraction_log
              and rows[0].worst_contraction_log <= rows[2].worst_contraction_log)
        details.append(
            f"T={budget}: {rows[0].worst_contraction_log:+.1f} vs "
            f"cos {rows[1].worst_contraction_log:+.1f}, "
            f"lin {rows[2].worst_contraction_log:+.1f}")
    _report(10, "phi=2*kappa wins the worst-direction contraction", ok,
            "; ".join(details), time.perf_counter() - start, 5.0)
