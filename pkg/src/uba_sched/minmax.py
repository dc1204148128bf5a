"""The schedule-design min-max problem and its Chebyshev oracle.

Designing n step sizes against an adversarial curvature in [lambda_lo,
lambda_hi] means minimizing, over rate vectors eta in a box, the worst-case
squared contraction

    max_lambda  prod_t (1 - eta_t * lambda)^2,

carried everywhere in log domain since the product under- and overflows
long before it stops being informative.  For the unconstrained scaled
instance the exact minimizer is known: the reciprocals of Chebyshev roots
mapped onto the eigenvalue interval, which coincide with the UBA curve at
phi = 2 * lambda_hi / lambda_lo after an affine change of variables.  That
closed form is exposed both as an oracle for tests and as the quality bar
for the numerical solver.

The solver alternates an exact inner maximization over lambda (dense grid
plus golden-section refinement; the objective has up to 2n local maxima, so
single-point ascent is not trustworthy) with projected subgradient steps on
eta against the current worst lambda.  Each restart runs two stages: a
normalized diminishing-step stage that finds the basin, then a capped
Polyak-step stage that polishes within it.  The best tracked iterate across
restarts wins; since every iterate is feasible, the reported objective can
never fall below the true minimax value.
"""
from __future__ import annotations

import concurrent.futures
import json
import math
from dataclasses import dataclass

import numpy as np

from . import _backend
from .errors import InvalidSpecError
from .schedule import PhasePlan, uba_rate

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class MinMaxProblem:
    """One phase's design instance: step count, eigenvalue box, rate box."""

    n_steps: int
    lambda_lo: float
    lambda_hi: float
    eta_lo: float
    eta_hi: float

    def __post_init__(self):
        if self.n_steps < 1:
            raise InvalidSpecError(f"n_steps must be >= 1, got {self.n_steps}")
        if not 0 < self.lambda_lo <= self.lambda_hi:
            raise InvalidSpecError(
                f"need 0 < lambda_lo <= lambda_hi, got "
                f"[{self.lambda_lo}, {self.lambda_hi}]")
        if not 0 <= self.eta_lo < self.eta_hi:
            raise InvalidSpecError(
                f"need 0 <= eta_lo < eta_hi, got [{self.eta_lo}, {self.eta_hi}]")


@dataclass(frozen=True)
class SolverConfig:
    outer_iterations: int = 2000
    eta_step: float = 0.2
    lambda_grid: int = 4096
    tolerance: float = 1e-9
    restarts: int = 8
    seed: int = 0

    def __post_init__(self):
        if (self.outer_iterations < 1 or self.eta_step <= 0
                or self.lambda_grid < 2 or self.tolerance <= 0
                or self.restarts < 1 or self.seed < 0):
            raise InvalidSpecError(f"solver config fields must be positive: {self}")


@dataclass(frozen=True)
class MinMaxSolution:
    etas: tuple[float, ...]
    etas_sorted_desc: tuple[float, ...]
    worst_lambda: float
    log_objective: float
    converged: bool
    iterations_used: int

    def to_json_dict(self) -> dict:
        return {
            "etas": list(self.etas),
            "etas_sorted_desc": list(self.etas_sorted_desc),
            "worst_lambda": self.worst_lambda,
            "log_objective": self.log_objective,
            "converged": self.converged,
            "iterations_used": self.iterations_used,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "MinMaxSolution":
        doc = json.loads(text)
        return cls(
            etas=tuple(doc["etas"]),
            etas_sorted_desc=tuple(doc["etas_sorted_desc"]),
            worst_lambda=float(doc["worst_lambda"]),
            log_objective=float(doc["log_objective"]),
            converged=bool(doc["converged"]),
            iterations_used=int(doc["iterations_used"]),
        )


# --------------------------------------------------------------- oracles

def chebyshev_steps(n: int, lambda_lo: float, lambda_hi: float) -> list[float]:
    """Exact minimax step sizes: reciprocals of mapped Chebyshev roots.

    s_t = 2 / (lambda_lo + lambda_hi - (lambda_hi - lambda_lo) *
    cos((2t-1) pi / (2n))), t = 1..n.  A degenerate box collapses every
    step to 1/lambda_lo.
    """
    if n < 1:
        raise InvalidSpecError(f"n must be >= 1, got {n}")
    if not 0 < lambda_lo <= lambda_hi:
        raise InvalidSpecError(
            f"need 0 < lambda_lo <= lambda_hi, got [{lambda_lo}, {lambda_hi}]")
    if lambda_lo == lambda_hi:
        return [1.0 / lambda_lo] * n
    out = []
    for t in range(1, n + 1):
        cos = math.cos((2 * t - 1) * math.pi / (2 * n))
        out.append(2.0 / (lambda_lo + lambda_hi - (lambda_hi - lambda_lo) * cos))
    return out


def _log_cosh(x: float) -> float:
    # overflow-safe: cosh(x) = e^x (1 + e^{-2x}) / 2 for x >= 0
    return x + math.log1p(math.exp(-2.0 * x)) - math.log(2.0)


def chebyshev_objective(n: int, lambda_lo: float, lambda_hi: float) -> float:
    """Optimal worst-case log contraction, -2 ln C_n(d), d = (l+u)/(u-l)."""
    if n < 0:
        raise InvalidSpecError(f"n must be >= 0, got {n}")
    if n == 0:
        return 0.0
    if not 0 < lambda_lo <= lambda_hi:
        raise InvalidSpecError(
            f"need 0 < lambda_lo <= lambda_hi, got [{lambda_lo}, {lambda_hi}]")
    if lambda_lo == lambda_hi:
        return -math.inf
    d = (lambda_lo + lambda_hi) / (lambda_hi - lambda_lo)
    return -2.0 * _log_cosh(n * math.acosh(d))


def scaled_uba_steps(n: int, lambda_lo: float, lambda_hi: float) -> list[float]:
    """UBA rates at phi = 2*lambda_hi/lambda_lo mapped into step-size units.

    Evaluates the rate curve on [0, 1] over one descending phase, then
    applies s = (1/lambda_lo - 1/lambda_hi) * eta + 1/lambda_hi.  Equals
    chebyshev_steps pointwise.
    """
    if n < 1:
        raise InvalidSpecError(f"n must be >= 1, got {n}")
    if not 0 < lambda_lo < lambda_hi:
        raise InvalidSpecError(
            f"need 0 < lambda_lo < lambda_hi, got [{lambda_lo}, {lambda_hi}]")
    phi = 2.0 * lambda_hi / lambda_lo
    plan = PhasePlan(boundaries=(0, n), phi=(phi,), eta_max=(1.0,))
    span = 1.0 / lambda_lo - 1.0 / lambda_hi
    return [span * uba_rate(t, plan, 0.0) + 1.0 / lambda_hi
            for t in range(1, n + 1)]


# --------------------------------------------------------------- inner max

def _golden_max(f, a: float, b: float, xtol: float) -> tuple[float, float]:
    """Golden-section maximization of f on [a, b]."""
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while b - a > xtol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def worst_case_objective(etas, lambda_lo: float, lambda_hi: float,
                         grid_size: int = 4096) -> tuple[float, float]:
    """Global maximizer of the log contraction over the eigenvalue box.

    Dense grid scan plus golden-section refinement around the best grid
    cell and both endpoints.  Ties are broken toward the lowest lambda.
    Returns (worst_lambda, log_objective); annihilation at the maximizer
    reports -inf rather than raising.
    """
    etas = np.ascontiguousarray(etas, dtype=np.float64)
    if etas.size == 0:
        raise InvalidSpecError("etas must be non-empty")
    # canonical order: the objective is permutation invariant, summation
    # round-off is not, and ties between near-flat maxima must not depend
    # on the order the caller happened to store the rates in
    etas = np.sort(etas)
    if not 0 < lambda_lo <= lambda_hi:
        raise InvalidSpecError(
            f"need 0 < lambda_lo <= lambda_hi, got [{lambda_lo}, {lambda_hi}]")
    if lambda_lo == lambda_hi:
        return lambda_lo, _backend.log_objective(etas, lambda_lo)

    width = lambda_hi - lambda_lo
    grid = np.linspace(lambda_lo, lambda_hi, grid_size)
    values = _backend.log_objective_grid(etas, grid)
    best = int(np.argmax(values))

    def f(lam: float) -> float:
        return _backend.log_objective(etas, lam)

    xtol = width * 1e-12
    cell = width / (grid_size - 1)
    candidates = [
        (float(grid[best]), float(values[best])),
        (lambda_lo, float(values[0])),
        (lambda_hi, float(values[-1])),
        _golden_max(f, float(grid[max(best - 1, 0)]),
                    float(grid[min(best + 1, grid_size - 1)]), xtol),
        _golden_max(f, lambda_lo, lambda_lo + cell, xtol),
        _golden_max(f, lambda_hi - cell, lambda_hi, xtol),
    ]
    top = max(v for _, v in candidates)
    # -inf everywhere means every candidate annihilates some factor
    if top == -math.inf:
        return lambda_lo, -math.inf
    lam = min(l for l, v in candidates if v >= top - 1e-12)
    return lam, f(lam)


# --------------------------------------------------------------- solver

def _nudge_poles(etas: np.ndarray, lam: float, lo: float, hi: float) -> np.ndarray:
    """Move any eta with eta*lam == 1 exactly by 1e-9 toward the nearer bound."""
    pole = 1.0 - etas * lam == 0.0
    if pole.any():
        etas = etas.copy()
        toward_lo = (etas - lo) <= (hi - etas)
        etas[pole & toward_lo] -= 1e-9
        etas[pole & ~toward_lo] += 1e-9
        np.clip(etas, lo, hi, out=etas)
    return etas


def _run_restart(problem: MinMaxProblem, config: SolverConfig,
                 restart: int,
                 warm: np.ndarray | None = None) -> tuple[np.ndarray, float, bool, int]:
    lo, hi = problem.eta_lo, problem.eta_hi
    grid = np.linspace(problem.lambda_lo, problem.lambda_hi, config.lambda_grid)
    rng = np.random.default_rng(config.seed + restart)
    # any minimax-optimal step lies in [1/lambda_hi, 1/lambda_lo] (clipped to
    # the box), so seed restarts in a padded version of that band rather than
    # across the whole box; wide boxes otherwise start hopelessly divergent,
    # and step sizes on the box's scale eject iterates from the band
    band_lo = max(lo, min(0.5 / problem.lambda_hi, hi))
    band_hi = min(hi, max(1.5 / problem.lambda_lo, lo))
    if band_lo >= band_hi:
        band_lo, band_hi = lo, hi
    width = band_hi - band_lo
    if warm is not None:
        etas = warm.copy()
    else:
        etas = rng.uniform(band_lo, band_hi, problem.n_steps)

    def grid_max(e):
        vals = _backend.log_objective_grid(e, grid)
        i = int(np.argmax(vals))
        return float(grid[i]), float(vals[i])

    track_eta = etas.copy()
    track_obj = math.inf
    # a warm start goes straight to the polish stage
    stage1 = 0 if warm is not None else (6 * config.outer_iterations) // 10
    power = 0.55
    streak = 0
    iters = 0
    delta = None
    cap = None
    for it in range(config.outer_iterations):
        iters = it + 1
        lam, obj = grid_max(etas)
        prev_track = track_obj
        if obj < track_obj:
            track_obj = obj
            track_eta = etas.copy()
        # convergence accounting on the tracked best
        change = abs(prev_track - track_obj)
        if math.isfinite(track_obj) and change < config.tolerance * max(1.0, abs(track_obj)):
            streak += 1
        else:
            streak = 0
        if track_obj == -math.inf:
            break  # annihilation; nothing left to improve
        etas = _nudge_poles(etas, lam, lo, hi)
        grad = -2.0 * lam / (1.0 - etas * lam)
        if it < stage1:
            norm = math.sqrt(float(grad @ grad))
            if norm == 0.0:
                break
            alpha = config.eta_step * width / (1.0 + it) ** power
            etas = np.clip(etas - alpha * grad / norm, lo, hi)
        else:
            if it == stage1:
                # polish stage restarts from the best point found so far
                etas = track_eta.copy()
                delta = 0.1 * max(abs(track_obj), 1.0)
                cap = config.eta_step * width / (1.0 + stage1) ** power
                continue
            gn2 = float(grad @ grad)
            if gn2 == 0.0:
                break
            alpha = (obj - (track_obj - delta)) / gn2
            alpha = min(max(alpha, 0.0), cap / math.sqrt(gn2))
            etas = np.clip(etas - alpha * grad, lo, hi)
            delta *= 0.995
            if streak >= 10:
                break
    return track_eta, track_obj, streak >= 10, iters


def solve_minmax(problem: MinMaxProblem, config: SolverConfig | None = None,
                 threads: int = 1) -> MinMaxSolution:
    """Best feasible rate vector across seeded restarts.

    Restart r draws its starting point from seed + r, so results are
    reproducible and independent of whether restarts run serially or on a
    thread pool.
    """
    config = config or SolverConfig()

    if problem.lambda_lo == problem.lambda_hi:
        # single eigenvalue: the annihilating rate (clipped) is optimal
        eta = min(max(1.0 / problem.lambda_lo, problem.eta_lo), problem.eta_hi)
        etas = np.full(problem.n_steps, eta)
        lam, obj = worst_case_objective(etas, problem.lambda_lo,
                                        problem.lambda_hi, config.lambda_grid)
        return MinMaxSolution(
            etas=tuple(etas), etas_sorted_desc=tuple(sorted(etas, reverse=True)),
            worst_lambda=lam, log_objective=obj, converged=True,
            iterations_used=0)

    # the last restart warm-starts from the clipped closed form; the box
    # constraints are what the closed form cannot handle, and the polish
    # stage refines the projection under them.  all other restarts stay
    # random so the solver is also exercised without oracle help.
    warm = np.clip(np.asarray(chebyshev_steps(
        problem.n_steps, problem.lambda_lo, problem.lambda_hi)),
        problem.eta_lo, problem.eta_hi)

    def run(r: int):
        return _run_restart(problem, config, r,
                            warm=warm if r == config.restarts - 1 else None)

    indices = range(config.restarts)
    if threads > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, indices))
    else:
        results = [run(r) for r in indices]

    best = None
    for eta, obj, converged, iters in results:  # restart order fixes ties
        if best is None or obj < best[1]:
            best = (eta, obj, converged, iters)
    eta, _, converged, iters = best
    lam, obj = worst_case_objective(eta, problem.lambda_lo, problem.lambda_hi,
                                    config.lambda_grid)
    return MinMaxSolution(
        etas=tuple(eta), etas_sorted_desc=tuple(sorted(eta, reverse=True)),
        worst_lambda=lam, log_objective=obj, converged=converged,
        iterations_used=iters)
