"""Rational-cosine curve fits of sorted step-size data, reduced to phi.

Numerical min-max solutions are unordered sets; sorted descending they
trace a smooth curve that the three-parameter model

    y(u) = a * u / (b + c * u),    u = 1 + cos(theta_t)

captures across eigenvalue boxes.  The parameters sit on a scaling ray
((a, b, c) ~ (sa, sb, sc) describe the same curve), and fits cluster
around the relation (b + 2c) / a = 2; imposing it collapses the model to
the single parameter phi = b / a, which is exactly the rate-curve family
this package schedules with.  The fit is nonlinear least squares by
Nelder-Mead simplex from 16 deterministic multi-starts; the model's flat
valleys and pole structure punish single-start and gradient methods.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .errors import InvalidSpecError, ReductionRefusedError
from .minmax import MinMaxProblem, MinMaxSolution, SolverConfig, solve_minmax
from .schedule import PhasePlan, ScheduleSpec

RELATION_TOLERANCE = 0.2


@dataclass(frozen=True)
class FitResult:
    a: float
    b: float
    c: float
    phi: float
    rms_residual: float
    relation_error: float
    reduction_ok: bool
    out_of_range: bool

    def to_json_dict(self) -> dict:
        doc = {}
        for name in ("a", "b", "c", "phi", "rms_residual", "relation_error"):
            doc[name] = float(f"{getattr(self, name):.12g}")
        doc["reduction_ok"] = self.reduction_ok
        doc["out_of_range"] = self.out_of_range
        return doc

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "FitResult":
        doc = json.loads(text)
        return cls(a=float(doc["a"]), b=float(doc["b"]), c=float(doc["c"]),
                   phi=float(doc["phi"]),
                   rms_residual=float(doc["rms_residual"]),
                   relation_error=float(doc["relation_error"]),
                   reduction_ok=bool(doc["reduction_ok"]),
                   out_of_range=bool(doc["out_of_range"]))


def _cosine_grid(n: int) -> np.ndarray:
    t = np.arange(1, n + 1)
    return 1.0 + np.cos((2 * t - 1) * np.pi / (2 * n))


def curve_exits_unit_box(a: float, b: float, c: float,
                         tol: float = 1e-6) -> bool:
    """True when a*u/(b+c*u) leaves [0, 1] anywhere on u in (0, 2].

    The fit is performed unclamped, so a pole of the rational model inside
    the cosine's range, or an endpoint overshoot, shows up here rather
    than as an error.
    """
    u = np.linspace(1e-9, 2.0, 513)
    with np.errstate(divide="ignore", invalid="ignore"):
        vals = a * u / (b + c * u)
    if not np.isfinite(vals).all():
        return True
    return bool(vals.min() < -tol or vals.max() > 1.0 + tol)


def _nm_fit(y: np.ndarray, n: int, seed: int, starts: int):
    u = _cosine_grid(n)

    def objective(p):
        a, b, c = p
        den = b + c * u
        if a <= 0 or b <= 0 or np.any(den <= 1e-12):
            bad = den[den <= 1e-12]
            return 1e6 + abs(a) + abs(b) + float(np.abs(bad).sum())
        r = a * u / den - y
        return float(r @ r) / n

    inits = [np.array([1.0, 2.0, 0.0]), np.array([1.0, 0.5, 0.75]),
             np.array([2.0, 4.0, 0.0]), np.array([1.0, 10.0, -0.5])]
    rng = np.random.default_rng(seed)
    while len(inits) < starts:
        a0 = math.exp(rng.uniform(math.log(1e-2), math.log(2000.0)))
        b0 = math.exp(rng.uniform(math.log(1e-2), math.log(1000.0)))
        c0 = rng.uniform(-500.0, 1500.0)
        inits.append(np.array([a0, b0, c0]))

    best = None
    for x0 in inits:
        res = optimize.minimize(objective, x0, method="Nelder-Mead",
                                options=dict(maxiter=4000, xatol=1e-13,
                                             fatol=1e-16))
        polish = optimize.minimize(objective, res.x, method="Nelder-Mead",
                                   options=dict(maxiter=4000, xatol=1e-14,
                                                fatol=1e-18))
        cand = polish if polish.fun <= res.fun else res
        if best is None or cand.fun < best.fun:
            best = cand
    return best


def fit_parametric(etas_sorted, eta_lo: float, eta_hi: float, n_steps: int,
                   seed: int = 0, starts: int = 16) -> FitResult:
    """Least-squares (a, b, c) for a sorted rate sequence on the box.

    Accepts either sort order; ascending input is reversed first, which
    matches evaluating the model against theta shifted by pi, so both
    orders produce the identical fit.  Residuals are computed on rates
    normalized by (eta_hi - eta_lo) for scale invariance.
    """
    data = np.asarray(etas_sorted, dtype=np.float64)
    if data.ndim != 1 or data.size != n_steps or n_steps < 1:
        raise InvalidSpecError(
            f"expected {n_steps} rates, got shape {data.shape}")
    if not eta_lo < eta_hi:
        raise InvalidSpecError(f"need eta_lo < eta_hi, got [{eta_lo}, {eta_hi}]")
    span = eta_hi - eta_lo
    # tolerate mild overshoot (reference parameter sets in the wild exceed
    # eta_hi by ~2% at the peak); the out_of_range flag reports it
    slack = 0.05 * span
    if data.min() < eta_lo - slack or data.max() > eta_hi + slack:
        raise InvalidSpecError("rates leave the [eta_lo, eta_hi] box")
    if data[0] < data[-1]:
        data = data[::-1]
    y = (data - eta_lo) / span

    if y.max() - y.min() == 0.0:
        # constant data is the phi = 0 curve when it sits at eta_hi; any
        # other level is not representable, which the relation error shows
        level = float(y[0])
        a = level if level > 0 else 1.0
        rms = 0.0 if level > 0 else 1.0
        return FitResult(a=a, b=0.0, c=1.0, phi=0.0, rms_residual=rms,
                         relation_error=abs(2.0 / a - 2.0),
                         reduction_ok=abs(2.0 / a - 2.0) <= RELATION_TOLERANCE,
                         out_of_range=level > 1.0 + 1e-6)

    best = _nm_fit(y, n_steps, seed, starts)
    a, b, c = (float(v) for v in best.x)
    relation_error = abs((b + 2.0 * c) / a - 2.0)
    return FitResult(
        a=a, b=b, c=c, phi=b / a,
        rms_residual=math.sqrt(max(best.fun, 0.0)),
        relation_error=relation_error,
        reduction_ok=relation_error <= RELATION_TOLERANCE,
        out_of_range=curve_exits_unit_box(a, b, c))


def fitted_curve(fit: FitResult, eta_lo: float, eta_hi: float, n_steps: int,
                 ascending: bool = False) -> list[float]:
    """The fitted model evaluated on the length-n theta grid.

    The ascending variant is the pi phase shift of the descending one,
    which on this grid is exactly the reversed sequence.
    """
    u = _cosine_grid(n_steps)
    vals = (eta_hi - eta_lo) * fit.a * u / (fit.b + fit.c * u) + eta_lo
    out = [float(v) for v in vals]
    return out[::-1] if ascending else out


def reduce_to_uba(fit: FitResult, eta_lo: float, eta_hi: float,
                  n_steps: int) -> ScheduleSpec:
    """Collapse a fit to the single-parameter schedule with phi = b/a."""
    if fit.relation_error > RELATION_TOLERANCE:
        raise ReductionRefusedError(
            f"relation error {fit.relation_error:.4g} exceeds "
            f"{RELATION_TOLERANCE}; the fit is not close enough to the "
            f"one-parameter family")
    plan = PhasePlan(boundaries=(0, n_steps), phi=(fit.phi,),
                     eta_max=(eta_hi,))
    return ScheduleSpec(kind="UBA", total_steps=n_steps, eta_min=eta_lo,
                        plan=plan)


def pipeline(problem: MinMaxProblem, config: SolverConfig | None = None,
             threads: int = 1) -> tuple[MinMaxSolution, FitResult, ScheduleSpec]:
    """Solve, sort descending, fit, reduce.

    The fit normalizes by the solution's own range rather than the
    problem's rate box: the optimal steps are an affine image of the rate
    curve, and the affine offset (the 1/lambda_hi floor) cancels only
    under the solution's range, keeping the data inside the model family.
    """
    solution = solve_minmax(problem, config, threads=threads)
    data = np.asarray(solution.etas_sorted_desc)
    lo = float(data.min())
    hi = float(data.max())
    if hi - lo <= 1e-12 * max(1.0, abs(hi)):
        lo, hi = problem.eta_lo, problem.eta_hi
    fit = fit_parametric(data, lo, hi, problem.n_steps)
    spec = reduce_to_uba(fit, lo, hi, problem.n_steps)
    return solution, fit, spec
