"""Min-max schedule design: oracles, inner max, solver quality.

Chebyshev reference values are derived in-test through independent routes
(polynomial recurrence, closed-form surds) rather than the module's own
formulas.
"""
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from uba_sched.errors import InvalidSpecError
from uba_sched.minmax import (
    MinMaxProblem,
    MinMaxSolution,
    SolverConfig,
    chebyshev_objective,
    chebyshev_steps,
    scaled_uba_steps,
    solve_minmax,
    worst_case_objective,
)


def cheb_poly(n, x):
    """Chebyshev polynomial of the first kind via the three-term recurrence."""
    prev, cur = 1.0, x
    if n == 0:
        return prev
    for _ in range(n - 1):
        prev, cur = cur, 2 * x * cur - prev
    return cur


# ------------------------------------------------------- closed-form oracles

def test_chebyshev_steps_single():
    assert chebyshev_steps(1, 1.0, 2.0) == pytest.approx([2.0 / 3.0], abs=1e-15)


def test_chebyshev_steps_pair():
    s = chebyshev_steps(2, 1.0, 3.0)
    r = math.sqrt(2) / 2
    assert s[0] == pytest.approx(1.0 / (2.0 - r), abs=1e-15)
    assert s[1] == pytest.approx(1.0 / (2.0 + r), abs=1e-15)


def test_chebyshev_steps_degenerate_box():
    assert chebyshev_steps(3, 5.0, 5.0) == pytest.approx([0.2, 0.2, 0.2], abs=1e-16)


def test_chebyshev_objective_values():
    # d=3: C_1=3; d=2: C_2=7
    assert chebyshev_objective(1, 1.0, 2.0) == pytest.approx(math.log(1 / 9), rel=1e-14)
    assert chebyshev_objective(2, 1.0, 3.0) == pytest.approx(math.log(1 / 49), rel=1e-14)
    assert chebyshev_objective(0, 1.0, 2.0) == 0.0
    assert chebyshev_objective(5, 2.0, 2.0) == -math.inf


def test_chebyshev_objective_matches_recurrence():
    for n in range(1, 20):
        d = (1.0 + 10.0) / (10.0 - 1.0)
        expect = -2.0 * math.log(cheb_poly(n, d))
        assert chebyshev_objective(n, 1.0, 10.0) == pytest.approx(expect, rel=1e-11)


def test_scaled_identity_small():
    for n in (1, 2, 5, 16):
        su = scaled_uba_steps(n, 1.0, 10.0)
        ch = chebyshev_steps(n, 1.0, 10.0)
        assert np.max(np.abs(np.array(su) - np.array(ch))) < 1e-12


def test_scaled_uba_steps_requires_strict_box():
    with pytest.raises(InvalidSpecError):
        scaled_uba_steps(4, 2.0, 2.0)


# ------------------------------------------------------- inner maximization

def test_worst_case_single_step():
    lam, obj = worst_case_objective([2.0 / 3.0], 1.0, 2.0)
    assert obj == pytest.approx(math.log(1 / 9), abs=1e-9)
    assert lam == pytest.approx(1.0, abs=1e-6) or lam == pytest.approx(2.0, abs=1e-6)


def test_worst_case_zero_steps():
    lam, obj = worst_case_objective([0.0, 0.0, 0.0], 0.5, 4.0)
    assert obj == 0.0
    assert 0.5 <= lam <= 4.0


def test_worst_case_chebyshev_four():
    etas = chebyshev_steps(4, 1.0, 10.0)
    _, obj = worst_case_objective(etas, 1.0, 10.0)
    expect = -2.0 * math.log(cheb_poly(4, 11.0 / 9.0))
    assert obj == pytest.approx(expect, abs=1e-9)


def test_worst_case_annihilation_reports_neg_inf():
    # eta exactly 1/lam at an endpoint
    lam, obj = worst_case_objective([0.5], 2.0, 2.0)
    assert obj == -math.inf


def test_equioscillation_at_endpoints():
    from uba_sched._backend import log_objective

    for n in (2, 4, 8, 16):
        etas = np.asarray(chebyshev_steps(n, 1.0, 10.0))
        lo_v = log_objective(etas, 1.0)
        hi_v = log_objective(etas, 10.0)
        assert lo_v == pytest.approx(hi_v, rel=1e-8)
        _, obj = worst_case_objective(etas, 1.0, 10.0)
        assert obj == pytest.approx(lo_v, rel=1e-8)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(min_value=0.0, max_value=1.0), min_size=1, max_size=8),
       st.randoms(use_true_random=False))
def test_permutation_invariance(etas, rnd):
    perm = list(etas)
    rnd.shuffle(perm)
    lam1, obj1 = worst_case_objective(etas, 1.0, 10.0)
    lam2, obj2 = worst_case_objective(perm, 1.0, 10.0)
    if math.isfinite(obj1) or math.isfinite(obj2):
        assert obj1 == pytest.approx(obj2, rel=1e-12, abs=1e-12)
    else:
        assert obj1 == obj2
    assert lam1 == pytest.approx(lam2, rel=1e-9, abs=1e-9)


def test_optimality_certificate_random_vectors():
    # no feasible vector beats the Chebyshev optimum
    rng = np.random.default_rng(7)
    for n in (2, 5, 10):
        opt = chebyshev_objective(n, 1.0, 10.0)
        for _ in range(100):
            etas = rng.uniform(0.1, 1.0, n)
            _, obj = worst_case_objective(etas, 1.0, 10.0)
            assert obj >= opt - 1e-9


# ------------------------------------------------------- solver

def test_solve_single_step_midpoint():
    prob = MinMaxProblem(n_steps=1, lambda_lo=1.0, lambda_hi=2.0,
                         eta_lo=0.0, eta_hi=1.0)
    sol = solve_minmax(prob)
    assert sol.etas[0] == pytest.approx(2.0 / 3.0, abs=1e-6)
    assert sol.log_objective == pytest.approx(math.log(1 / 9), abs=1e-6)
    assert sol.converged


def test_solve_degenerate_box_annihilates():
    prob = MinMaxProblem(n_steps=2, lambda_lo=3.0, lambda_hi=3.0,
                         eta_lo=0.0, eta_hi=1.0)
    sol = solve_minmax(prob)
    assert sol.etas == pytest.approx([1 / 3, 1 / 3], abs=1e-15)
    assert sol.log_objective == -math.inf


def test_solve_reaches_chebyshev_quality_n4():
    prob = MinMaxProblem(n_steps=4, lambda_lo=1.0, lambda_hi=10.0,
                         eta_lo=0.0, eta_hi=1.0)
    sol = solve_minmax(prob)
    opt = chebyshev_objective(4, 1.0, 10.0)
    assert abs(sol.log_objective - opt) <= 0.01 * abs(opt)
    # feasible-point method cannot beat the optimum
    assert sol.log_objective >= opt - 1e-9
    assert all(0.0 <= e <= 1.0 for e in sol.etas)


def test_solver_threads_deterministic():
    prob = MinMaxProblem(n_steps=3, lambda_lo=1.0, lambda_hi=5.0,
                         eta_lo=0.0, eta_hi=1.0)
    cfg = SolverConfig(outer_iterations=200, restarts=4, seed=11)
    a = solve_minmax(prob, cfg, threads=1)
    b = solve_minmax(prob, cfg, threads=4)
    assert a.etas == b.etas
    assert a.log_objective == b.log_objective


def test_solution_sorted_descending():
    prob = MinMaxProblem(n_steps=4, lambda_lo=1.0, lambda_hi=10.0,
                         eta_lo=0.0, eta_hi=1.0)
    sol = solve_minmax(prob, SolverConfig(outer_iterations=300, restarts=2, seed=3))
    assert tuple(sorted(sol.etas, reverse=True)) == sol.etas_sorted_desc


def test_solution_json_round_trip():
    sol = MinMaxSolution(etas=(0.5, 0.2), etas_sorted_desc=(0.5, 0.2),
                         worst_lambda=1.0, log_objective=-2.0,
                         converged=True, iterations_used=42)
    doc = json.loads(sol.to_json())
    assert set(doc) == {"etas", "etas_sorted_desc", "worst_lambda",
                        "log_objective", "converged", "iterations_used"}
    assert MinMaxSolution.from_json(sol.to_json()) == sol


def test_worst_lambda_attains_objective():
    from uba_sched._backend import log_objective

    prob = MinMaxProblem(n_steps=3, lambda_lo=0.5, lambda_hi=6.0,
                         eta_lo=0.0, eta_hi=1.5)
    sol = solve_minmax(prob, SolverConfig(outer_iterations=400, restarts=3, seed=5))
    attained = log_objective(np.asarray(sol.etas), sol.worst_lambda)
    assert attained == pytest.approx(sol.log_objective, rel=1e-9, abs=1e-9)


def test_problem_validation():
    with pytest.raises(InvalidSpecError):
        MinMaxProblem(n_steps=0, lambda_lo=1.0, lambda_hi=2.0,
                      eta_lo=0.0, eta_hi=1.0)
    with pytest.raises(InvalidSpecError):
        MinMaxProblem(n_steps=2, lambda_lo=2.0, lambda_hi=1.0,
                      eta_lo=0.0, eta_hi=1.0)
    with pytest.raises(InvalidSpecError):
        MinMaxProblem(n_steps=2, lambda_lo=1.0, lambda_hi=2.0,
                      eta_lo=0.5, eta_hi=0.5)
