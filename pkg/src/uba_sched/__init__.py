"""Budget-aware learning-rate schedules and their design tools.

Public surface:

- ``schedule``: the UBA rate family, baselines, warmup, traces, mimics
- ``minmax``: the schedule-design min-max problem, its solver, and the
  Chebyshev closed-form oracle
- ``fitting``: rational-cosine curve fits and the reduction to phi
- ``bounds``: per-phase contraction and loss-gap bound evaluators
- ``simulate``: stochastic quadratic SGD simulation and schedule comparison
- ``cli``: the ``uba-sched`` command-line entry point
"""
from .bounds import (
    BoundInputs,
    bound_sweep,
    exact_product,
    lemma1_bound,
    log_lemma1_bound,
    sweep_csv_text,
    tau,
    theorem1_bound,
)
from .errors import (
    InvalidSpecError,
    OutOfRangeError,
    PhiNearTwoError,
    ReductionRefusedError,
)
from .fitting import (
    FitResult,
    curve_exits_unit_box,
    fit_parametric,
    fitted_curve,
    pipeline,
    reduce_to_uba,
)
from .minmax import (
    MinMaxProblem,
    MinMaxSolution,
    SolverConfig,
    chebyshev_objective,
    chebyshev_steps,
    scaled_uba_steps,
    solve_minmax,
    worst_case_objective,
)
from .schedule import (
    PhasePlan,
    RateTrace,
    ScheduleSpec,
    baseline_rate,
    mimic,
    phi_decay_sequence,
    trace,
    uba_rate,
)
from .simulate import (
    CompareRow,
    QuadModel,
    TrajectoryStats,
    compare_csv_text,
    compare_schedules,
    simulate,
    stats_csv_text,
)

__version__ = "0.1.0"

__all__ = [
    "BoundInputs",
    "CompareRow",
    "FitResult",
    "InvalidSpecError",
    "MinMaxProblem",
    "MinMaxSolution",
    "OutOfRangeError",
    "PhasePlan",
    "PhiNearTwoError",
    "QuadModel",
    "RateTrace",
    "ReductionRefusedError",
    "ScheduleSpec",
    "SolverConfig",
    "TrajectoryStats",
    "baseline_rate",
    "bound_sweep",
    "chebyshev_objective",
    "chebyshev_steps",
    "compare_csv_text",
    "compare_schedules",
    "curve_exits_unit_box",
    "exact_product",
    "fit_parametric",
    "fitted_curve",
    "lemma1_bound",
    "log_lemma1_bound",
    "mimic",
    "phi_decay_sequence",
    "pipeline",
    "reduce_to_uba",
    "scaled_uba_steps",
    "simulate",
    "solve_minmax",
    "stats_csv_text",
    "sweep_csv_text",
    "tau",
    "theorem1_bound",
    "trace",
    "uba_rate",
    "worst_case_objective",
    "__version__",
]
