"""Per-phase contraction bounds and the two-term loss-gap bound.

Everything here evaluates closed-form upper bounds on the squared
contraction product prod_j (1 - eta_j * lambda)^2 along one descending
phase of the rate schedule, and the bias + variance decomposition built
from them.  The branch structure mirrors the sign of phi - 2: both
branches divide by it, so the evaluators refuse phi within 1e-6 of 2
(that regime is the plain cosine schedule and needs no bound machinery).

The exponent in the bounds multiplies an eigenvalue that the two printed
branch statements choose differently (the smallest box eigenvalue for
phi > 2, the evaluated eigenvalue itself for phi < 2), while the
underlying derivation supports the smallest eigenvalue in both.  Every
evaluator therefore takes `exp_lambda` explicitly, defaulting exactly as
printed; sweeps and tests pin the derivation-consistent choice.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _backend
from .errors import InvalidSpecError, PhiNearTwoError
from .schedule import PhasePlan, uba_rate

PHI_WINDOW = 1e-6


@dataclass(frozen=True)
class BoundInputs:
    """One phase's bound-evaluation point.

    `spectrum` lists the eigenvalues entering the variance term; empty
    means the box endpoints.  `t_rel` is the in-phase step (1-based) the
    bound is evaluated at.
    """

    n: int
    phi: float
    eta_lo: float
    eta_hi: float
    lambda_lo: float
    lambda_hi: float
    t_rel: int
    sigma: float = 0.0
    spectrum: tuple[float, ...] = ()
    init_dist_sq: float = 0.0

    def __post_init__(self):
        if self.n < 1:
            raise InvalidSpecError(f"phase length must be >= 1, got {self.n}")
        if not 0 <= self.eta_lo <= self.eta_hi:
            raise InvalidSpecError(
                f"need 0 <= eta_lo <= eta_hi, got [{self.eta_lo}, {self.eta_hi}]")
        if not 0 < self.lambda_lo <= self.lambda_hi:
            raise InvalidSpecError(
                f"need 0 < lambda_lo <= lambda_hi, got "
                f"[{self.lambda_lo}, {self.lambda_hi}]")
        if not 1 <= self.t_rel <= self.n:
            raise InvalidSpecError(
                f"t_rel must be in [1, {self.n}], got {self.t_rel}")
        if self.sigma < 0:
            raise InvalidSpecError(f"sigma must be >= 0, got {self.sigma}")
        if self.init_dist_sq < 0:
            raise InvalidSpecError(
                f"init_dist_sq must be >= 0, got {self.init_dist_sq}")
        if self.phi < 0:
            raise InvalidSpecError(f"phi must be >= 0, got {self.phi}")
        if abs(self.phi - 2.0) < PHI_WINDOW:
            raise PhiNearTwoError(
                f"phi={self.phi} is within {PHI_WINDOW} of 2, where both "
                f"bound branches divide by zero; that regime is the plain "
                f"cosine schedule, use its closed form instead")
        spectrum = tuple(float(v) for v in self.spectrum)
        if not spectrum:
            spectrum = (self.lambda_lo, self.lambda_hi)
        lo = self.lambda_lo - 1e-12
        hi = self.lambda_hi + 1e-12
        if any(not lo <= v <= hi for v in spectrum):
            raise InvalidSpecError(
                f"spectrum must lie within [{self.lambda_lo}, "
                f"{self.lambda_hi}]")
        object.__setattr__(self, "spectrum", spectrum)


def _cos_term(n: int, t_rel: int) -> float:
    return 1.0 + math.cos((2 * t_rel - 1) * math.pi / (2 * n))


def tau(inputs: BoundInputs, exp_lambda: float | None = None) -> float:
    """Signed bound exponent 4*lam*(span)*(1+cos)*n / ((phi-2)*pi).

    Negative in the phi < 2 branch, where the bounds raise bases to -tau.
    `exp_lambda` defaults to the smallest box eigenvalue, as the exponent
    is printed.
    """
    lam = inputs.lambda_lo if exp_lambda is None else exp_lambda
    span = inputs.eta_hi - inputs.eta_lo
    return (4.0 * lam * span * _cos_term(inputs.n, inputs.t_rel) * inputs.n
            / ((inputs.phi - 2.0) * math.pi))


def _phase_rates(inputs: BoundInputs, upto: int) -> list[float]:
    plan = PhasePlan(boundaries=(0, inputs.n), phi=(inputs.phi,),
                     eta_max=(inputs.eta_hi,))
    return [uba_rate(t, plan, inputs.eta_lo) for t in range(1, upto + 1)]


def _log_base_ratio(inputs: BoundInputs, i: int) -> float:
    """ln of the branch base for summand i, over the value at t_rel.

    i = 1 gives the bias base.  phi > 2 uses the linear-in-step form,
    phi < 2 the shifted form with A = 2*phi + 2*pi - phi*pi.
    """
    n, phi, t_rel = inputs.n, inputs.phi, inputs.t_rel
    if phi > 2:
        num = 4.0 * n + (phi - 2.0) * math.pi * i
        den = 4.0 * n + (phi - 2.0) * math.pi * t_rel
    else:
        big_a = 2.0 * phi + 2.0 * math.pi - phi * math.pi
        num = big_a - (2.0 - phi) * math.pi * (t_rel - 0.5) / n
        if i == 0:
            den = big_a + (2.0 - phi) * math.pi / (2.0 * n)
        else:
            den = big_a - (2.0 - phi) * math.pi * (i - 0.5) / n
    return math.log(num / den)


def _unsigned_expo(inputs: BoundInputs, exp_lambda: float) -> float:
    span = inputs.eta_hi - inputs.eta_lo
    return (4.0 * exp_lambda * span * _cos_term(inputs.n, inputs.t_rel)
            * inputs.n / (abs(inputs.phi - 2.0) * math.pi))


def log_lemma1_bound(inputs: BoundInputs, lam: float,
                     exp_lambda: float | None = None) -> float:
    """Log-domain upper bound on the contraction product at eigenvalue lam.

    Defaults follow the printed branch statements: the phi > 2 exponent
    multiplies lambda_lo, the phi < 2 exponent multiplies lam itself.
    """
    if exp_lambda is None:
        exp_lambda = inputs.lambda_lo if inputs.phi > 2 else lam
    head = -2.0 * lam * inputs.eta_lo * inputs.t_rel
    expo = _unsigned_expo(inputs, exp_lambda)
    if inputs.phi > 2:
        return head + expo * _log_base_ratio(inputs, 1)
    return head + expo * _log_base_ratio(inputs, 0)


def lemma1_bound(inputs: BoundInputs, lam: float,
                 exp_lambda: float | None = None) -> float:
    """Linear-domain contraction bound; overflows saturate to inf."""
    log_value = log_lemma1_bound(inputs, lam, exp_lambda)
    if log_value > 709.0:
        return math.inf
    return math.exp(log_value)


def exact_product(etas, lam: float) -> float:
    """Sum of 2*ln|1 - eta*lam|; -inf when a factor annihilates."""
    data = np.ascontiguousarray(etas, dtype=np.float64)
    if data.size == 0:
        return 0.0
    return float(_backend.log_objective(data, lam))


def theorem1_bound(inputs: BoundInputs,
                   exp_lambda: float | None = None) -> tuple[float, float]:
    """(bias, variance) loss-gap bound at step t_rel of the phase.

    bias = base(1)^expo * exp(-2*lambda_lo*eta_lo*t_rel) * lambda_hi
    * init_dist_sq; variance sums eta_i^2 times the spectrum's decayed
    squares times the base ratio at i.  The decay eigenvalue in the bias
    exponential is lambda_lo (the derivation's choice; the printed
    statement leaves its eigenvalue index unbound).
    """
    if exp_lambda is None:
        exp_lambda = inputs.lambda_lo
    expo = _unsigned_expo(inputs, exp_lambda)
    t_rel = inputs.t_rel

    bias = 0.0
    if inputs.init_dist_sq > 0:
        i_bias = 1 if inputs.phi > 2 else 0
        log_bias = (expo * _log_base_ratio(inputs, i_bias)
                    - 2.0 * inputs.lambda_lo * inputs.eta_lo * t_rel)
        bias = math.exp(log_bias) * inputs.lambda_hi * inputs.init_dist_sq

    variance = 0.0
    if inputs.sigma > 0:
        rates = _phase_rates(inputs, t_rel)
        for i in range(1, t_rel + 1):
            ratio = math.exp(expo * _log_base_ratio(inputs, i))
            inner = sum(
                lj * lj * math.exp(-2.0 * lj * inputs.eta_lo * (t_rel - i))
                for lj in inputs.spectrum)
            variance += rates[i - 1] ** 2 * inner * ratio
        variance *= inputs.sigma ** 2
    return bias, variance


def bound_sweep(phis, ns, lambdas, eta_lo: float = 0.0, eta_hi: float = 1.0,
                exp_lambda: float | None = None) -> list[tuple]:
    """Exact-vs-bound table over a (phi, n, lambda, t_rel) grid.

    Rows are (phi, n, lambda, t_rel, log_exact, log_bound, margin) with
    margin = log_bound - log_exact.  The exponent eigenvalue defaults to
    the smallest swept lambda, the derivation-consistent reading, applied
    uniformly so rows are comparable across branches.
    """
    lambdas = [float(v) for v in lambdas]
    if not lambdas:
        raise InvalidSpecError("need at least one lambda")
    lam_lo, lam_hi = min(lambdas), max(lambdas)
    if exp_lambda is None:
        exp_lambda = lam_lo
    rows = []
    for phi in phis:
        for n in ns:
            plan = PhasePlan(boundaries=(0, n), phi=(float(phi),),
                             eta_max=(eta_hi,))
            rates = np.asarray(
                [uba_rate(t, plan, eta_lo) for t in range(1, n + 1)])
            for lam in lambdas:
                with np.errstate(divide="ignore"):
                    logs = 2.0 * np.log(np.abs(1.0 - rates * lam))
                cumulative = np.cumsum(logs)
                for t_rel in range(1, n + 1):
                    inputs = BoundInputs(
                        n=n, phi=float(phi), eta_lo=eta_lo, eta_hi=eta_hi,
                        lambda_lo=lam_lo, lambda_hi=lam_hi, t_rel=t_rel)
                    log_bound = log_lemma1_bound(inputs, lam, exp_lambda)
                    log_exact = float(cumulative[t_rel - 1])
                    rows.append((float(phi), int(n), lam, t_rel, log_exact,
                                 log_bound, log_bound - log_exact))
    return rows


def sweep_csv_text(rows) -> str:
    lines = ["phi,n,lambda,t_rel,log_exact,log_bound,margin"]
    for phi, n, lam, t_rel, log_exact, log_bound, margin in rows:
        lines.append(
            f"{phi:.12g},{n},{lam:.12g},{t_rel},{log_exact:.12g},"
            f"{log_bound:.12g},{margin:.12g}")
    return "\n".join(lines) + "\n"
