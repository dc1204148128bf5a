"""Monte-Carlo SGD on synthetic quadratic landscapes.

Everything is expressed in the Hessian eigenbasis, so a model is just its
eigenvalue spectrum plus the initial deviation coordinates.  One SGD step
with rate eta maps each coordinate independently:

    v_j <- (1 - eta * lambda_j) * v_j - eta * sigma * sqrt(lambda_j) * z_j

with z standard normal.  The additive term realizes gradient noise whose
covariance is exactly sigma^2 * H, the largest noise the variance bound
tolerates, so Monte-Carlo runs probe the bound at its tightest.  The loss
gap is 0.5 * sum_j lambda_j * v_j^2.

Replica r draws its noise from an independent substream seeded with
``seed XOR splitmix64(r)``.  Statistics are computed over the canonical
replica ordering with numpy's pairwise summation, so results are
bit-identical no matter how the replicas would be scheduled.  The noise
block for a run occupies replicas * steps * N doubles; horizons are
desk-scale, so it is generated up front rather than streamed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ._backend import evolve_gaps, log_objective
from .errors import InvalidSpecError
from .schedule import ScheduleSpec, trace

_MASK64 = (1 << 64) - 1
_GAP_CEILING = 1e300


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


@dataclass(frozen=True)
class QuadModel:
    """A quadratic objective given by its spectrum, plus the noise scale.

    init_coeffs are the starting deviation coordinates in the eigenbasis
    (unit eigenvectors assumed), one per eigenvalue.
    """

    spectrum: tuple[float, ...]
    init_coeffs: tuple[float, ...]
    sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        spectrum = tuple(float(x) for x in self.spectrum)
        coeffs = tuple(float(x) for x in self.init_coeffs)
        object.__setattr__(self, "spectrum", spectrum)
        object.__setattr__(self, "init_coeffs", coeffs)
        if len(spectrum) < 1:
            raise InvalidSpecError("spectrum must contain at least one eigenvalue")
        if min(spectrum) <= 0.0:
            raise InvalidSpecError("eigenvalues must be positive")
        if len(coeffs) != len(spectrum):
            raise InvalidSpecError("init_coeffs must match the spectrum length")
        if not self.sigma >= 0.0:
            raise InvalidSpecError("sigma must be non-negative")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise InvalidSpecError("seed must fit in an unsigned 64-bit integer")


@dataclass(frozen=True)
class TrajectoryStats:
    """Replica-averaged loss gaps at the recorded steps.

    worst_direction_contraction holds the per-eigenvalue noiseless factor
    prod_t (1 - eta_t * lambda_j)^2 over the simulated horizon, and
    contraction_log its logarithm (exact even where the product would
    overflow or underflow).
    """

    steps: tuple[int, ...]
    mean_gap: tuple[float, ...]
    stderr_gap: tuple[float, ...]
    worst_direction_contraction: tuple[float, ...]
    contraction_log: tuple[float, ...]
    replicas: int

    def __post_init__(self):
        if not (len(self.steps) == len(self.mean_gap) == len(self.stderr_gap)):
            raise InvalidSpecError("recorded sequences must share one length")
        if len(self.worst_direction_contraction) != len(self.contraction_log):
            raise InvalidSpecError("contraction fields must share one length")
        if self.replicas < 1:
            raise InvalidSpecError("replicas must be at least 1")


@dataclass(frozen=True)
class CompareRow:
    schedule: str
    final_gap: float
    final_stderr: float
    worst_contraction_log: float


def _record_steps(steps: int) -> list[int]:
    # every step up to 1000 recorded points, then a uniform stride with the
    # final step always kept
    if steps <= 0:
        return []
    stride = 1 if steps <= 1000 else math.ceil(steps / 1000)
    out = list(range(stride, steps + 1, stride))
    if not out or out[-1] != steps:
        out.append(steps)
    return out


def simulate(model: QuadModel, spec: ScheduleSpec, steps: int,
             replicas: int = 1024) -> TrajectoryStats:
    """Run replica SGD trajectories and average the loss gap per step.

    steps may be any prefix of the schedule's budget.  Divergent gaps
    (beyond 1e300) are recorded as infinity rather than raised.
    """
    steps = int(steps)
    replicas = int(replicas)
    if not 0 <= steps <= spec.total_steps:
        raise InvalidSpecError(
            f"steps must lie in [0, {spec.total_steps}], got {steps}")
    if replicas < 1:
        raise InvalidSpecError("replicas must be at least 1")

    rates = np.asarray(trace(spec).rates[:steps], dtype=np.float64)
    lam = np.asarray(model.spectrum, dtype=np.float64)
    n_dirs = lam.shape[0]

    contraction_log = tuple(float(log_objective(rates, l)) for l in lam)
    with np.errstate(over="ignore"):
        contraction = tuple(float(np.exp(c)) for c in contraction_log)

    record = _record_steps(steps)
    v = np.tile(np.asarray(model.init_coeffs, dtype=np.float64),
                (replicas, 1))
    noise = None
    noise_amp = model.sigma * np.sqrt(lam)
    if model.sigma > 0.0 and steps > 0:
        noise = np.empty((replicas, steps, n_dirs), dtype=np.float64)
        base = int(model.seed)
        for r in range(replicas):
            rng = np.random.default_rng(base ^ _splitmix64(r))
            noise[r] = rng.standard_normal((steps, n_dirs))

    gaps = evolve_gaps(v, rates, lam, noise_amp, noise,
                       np.asarray(record, dtype=np.int64))
    gaps = np.asarray(gaps)
    gaps = np.where(np.isnan(gaps) | (gaps > _GAP_CEILING), np.inf, gaps)

    mean = gaps.mean(axis=0)
    if replicas > 1:
        with np.errstate(invalid="ignore"):
            stderr = gaps.std(axis=0, ddof=1) / math.sqrt(replicas)
        stderr = np.where(np.isnan(stderr), np.inf, stderr)
    else:
        stderr = np.zeros_like(mean)

    return TrajectoryStats(
        steps=tuple(record),
        mean_gap=tuple(float(x) for x in mean),
        stderr_gap=tuple(float(x) for x in stderr),
        worst_direction_contraction=contraction,
        contraction_log=contraction_log,
        replicas=replicas,
    )


def _default_label(spec: ScheduleSpec) -> str:
    if spec.kind == "UBA" and spec.plan is not None:
        if len(spec.plan.phi) == 1:
            return f"UBA(phi={spec.plan.phi[0]:g})"
        return f"UBA({len(spec.plan.phi)} phases)"
    return spec.kind


def compare_schedules(model: QuadModel, specs: Sequence[ScheduleSpec],
                      steps: int | None = None, replicas: int = 1024,
                      labels: Sequence[str] | None = None,
                      ) -> tuple[CompareRow, ...]:
    """Simulate each schedule under the shared budget and tabulate finals.

    All specs must declare the same total_steps; steps defaults to that
    budget and may be any prefix of it.  Every schedule sees the same
    model seed, so identical specs produce identical rows.
    """
    specs = list(specs)
    if not specs:
        raise InvalidSpecError("compare_schedules needs at least one schedule")
    budgets = {s.total_steps for s in specs}
    if len(budgets) != 1:
        raise InvalidSpecError(
            f"schedules must share one total budget, got {sorted(budgets)}")
    budget = specs[0].total_steps
    if steps is None:
        steps = budget
    if not 1 <= int(steps) <= budget:
        raise InvalidSpecError(f"steps must lie in [1, {budget}], got {steps}")

    if labels is None:
        names = [_default_label(s) for s in specs]
    else:
        names = [str(x) for x in labels]
        if len(names) != len(specs):
            raise InvalidSpecError("labels must match the schedules one-to-one")
    for name in names:
        if "," in name or "\n" in name:
            raise InvalidSpecError("schedule labels must not contain , or newline")

    rows = []
    for name, spec in zip(names, specs):
        stats = simulate(model, spec, steps=int(steps), replicas=replicas)
        rows.append(CompareRow(
            schedule=name,
            final_gap=stats.mean_gap[-1],
            final_stderr=stats.stderr_gap[-1],
            worst_contraction_log=max(stats.contraction_log),
        ))
    return tuple(rows)


def stats_csv_text(stats: TrajectoryStats,
                   bias_bounds: Sequence[float] | None = None,
                   variance_bounds: Sequence[float] | None = None) -> str:
    """CSV for a trajectory; bound columns appear only when both are given."""
    if (bias_bounds is None) != (variance_bounds is None):
        raise InvalidSpecError("provide both bound columns or neither")
    lines = []
    if bias_bounds is None:
        lines.append("step,mean_gap,stderr")
        for t, m, s in zip(stats.steps, stats.mean_gap, stats.stderr_gap):
            lines.append(f"{t},{m:.12g},{s:.12g}")
    else:
        bias = [float(x) for x in bias_bounds]
        var = [float(x) for x in variance_bounds]
        if len(bias) != len(stats.steps) or len(var) != len(stats.steps):
            raise InvalidSpecError("bound columns must match the recorded steps")
        lines.append("step,mean_gap,stderr,bias_bound,variance_bound")
        for t, m, s, b, w in zip(stats.steps, stats.mean_gap,
                                 stats.stderr_gap, bias, var):
            lines.append(f"{t},{m:.12g},{s:.12g},{b:.12g},{w:.12g}")
    return "\n".join(lines) + "\n"


def compare_csv_text(rows: Sequence[CompareRow]) -> str:
    lines = ["schedule,final_gap,final_stderr,worst_contraction_log"]
    for row in rows:
        lines.append(f"{row.schedule},{row.final_gap:.12g},"
                     f"{row.final_stderr:.12g},{row.worst_contraction_log:.12g}")
    return "\n".join(lines) + "\n"
