"""Rate schedules: the UBA family, six conventional baselines, and traces.

The UBA rate at step ``t`` of phase ``k`` (phases are 1-indexed, step ``t``
is 1-indexed inside the phase, ``n`` is the phase length) is

    theta = (2*(t - T_k) - 1) * pi / (2 * n) + (k - 1) * pi
    rate  = (eta_max_k - eta_min) * 2*(1 + cos theta)
            / (2*phi_k + (2 - phi_k)*(1 + cos theta)) + eta_min

A single shape parameter ``phi_k >= 0`` interpolates the whole family:
phi=0 holds the rate constant at eta_max_k, phi=2 is the cosine curve,
phi=2*kappa yields the minimax-optimal decay for condition number kappa,
and large phi approximates exponential decay.  The half-step offset in
theta is what makes the phi=2*kappa setting land exactly on mapped
Chebyshev roots, so it is kept verbatim everywhere.

Odd-numbered phases descend and even-numbered phases ascend (the
``(k-1)*pi`` shift flips the cosine), which is how cyclic and one-cycle
shapes are expressed as multi-phase plans.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import IO, Mapping

from .errors import InvalidSpecError, OutOfRangeError

SCHEDULE_KINDS = ("UBA", "Step", "Cosine", "Cyclic", "OneCycle", "LinearBT", "REX")

# mimic targets whose first segment rises; they keep their own ramp and
# ignore any warmup fraction
_ASCENDING_START_KINDS = ("OneCycle", "Cyclic")


@dataclass(frozen=True)
class PhasePlan:
    """Phase boundaries plus per-phase shape and peak rate.

    ``boundaries`` holds K step counts 0 = T_1 < T_2 < ... < T_K; phase k
    covers steps (T_k, T_{k+1}], so there are K-1 phases and K-1 entries in
    ``phi`` and ``eta_max``.  ``k_offset`` shifts the phase parity, letting a
    plan start on an ascending segment (used by the one-cycle and cyclic
    mimics); it defaults to 0 and is omitted from JSON when 0.
    """

    boundaries: tuple[int, ...]
    phi: tuple[float, ...]
    eta_max: tuple[float, ...]
    k_offset: int = 0

    def __post_init__(self):
        object.__setattr__(self, "boundaries", tuple(int(b) for b in self.boundaries))
        object.__setattr__(self, "phi", tuple(float(p) for p in self.phi))
        object.__setattr__(self, "eta_max", tuple(float(e) for e in self.eta_max))
        b = self.boundaries
        if len(b) < 2:
            raise InvalidSpecError("plan needs at least one phase (two boundaries)")
        if b[0] != 0:
            raise InvalidSpecError(f"first boundary must be 0, got {b[0]}")
        if any(x >= y for x, y in zip(b, b[1:])):
            raise InvalidSpecError(f"boundaries must be strictly increasing: {b}")
        if len(self.phi) != len(b) - 1 or len(self.eta_max) != len(b) - 1:
            raise InvalidSpecError(
                "phi and eta_max must have one entry per phase "
                f"({len(b) - 1}), got {len(self.phi)} and {len(self.eta_max)}")
        if any(p < 0 for p in self.phi):
            raise InvalidSpecError(f"phi values must be non-negative: {self.phi}")
        if any(e <= 0 for e in self.eta_max):
            raise InvalidSpecError(f"eta_max values must be positive: {self.eta_max}")

    @property
    def n_phases(self) -> int:
        return len(self.boundaries) - 1

    @property
    def final_boundary(self) -> int:
        return self.boundaries[-1]

    def phase_of(self, t: int) -> int:
        """1-indexed phase containing step t (T_k < t <= T_{k+1})."""
        if not 1 <= t <= self.final_boundary:
            raise OutOfRangeError(
                f"step {t} outside [1, {self.final_boundary}]")
        # phases are few; linear scan keeps this allocation-free
        for k in range(self.n_phases):
            if t <= self.boundaries[k + 1]:
                return k + 1
        raise AssertionError("unreachable")


@dataclass(frozen=True)
class ScheduleSpec:
    """Complete description of a schedule: kind, rate box, plan, warmup."""

    kind: str
    total_steps: int
    eta_min: float = 0.0
    warmup_fraction: float = 0.0
    plan: PhasePlan | None = None
    baseline_params: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "baseline_params", dict(self.baseline_params))
        if self.kind not in SCHEDULE_KINDS:
            raise InvalidSpecError(
                f"unknown schedule kind {self.kind!r}; expected one of {SCHEDULE_KINDS}")
        if self.total_steps < 1:
            raise InvalidSpecError(f"total_steps must be positive, got {self.total_steps}")
        if self.eta_min < 0:
            raise InvalidSpecError(f"eta_min must be >= 0, got {self.eta_min}")
        if not 0.0 <= self.warmup_fraction < 1.0:
            raise InvalidSpecError(
                f"warmup_fraction must lie in [0, 1), got {self.warmup_fraction}")
        if self.kind == "UBA":
            if self.plan is None:
                raise InvalidSpecError("UBA spec requires a phase plan")
            if any(e <= self.eta_min for e in self.plan.eta_max):
                raise InvalidSpecError(
                    f"every eta_max ({self.plan.eta_max}) must exceed "
                    f"eta_min ({self.eta_min})")
            covered = self.total_steps - self.warmup_steps
            if self.plan.final_boundary != covered:
                raise InvalidSpecError(
                    f"plan covers {self.plan.final_boundary} steps but "
                    f"{covered} post-warmup steps are required "
                    f"(total {self.total_steps}, warmup {self.warmup_steps})")
        else:
            if self.plan is not None:
                raise InvalidSpecError("phase plans apply only to UBA specs")
            if "eta0" not in self.baseline_params:
                raise InvalidSpecError(
                    f"{self.kind} spec requires baseline_params['eta0']")

    @property
    def warmup_steps(self) -> int:
        if self.kind in _ASCENDING_START_KINDS:
            return 0
        return int(self.warmup_fraction * self.total_steps)

    # ---- JSON wire format ------------------------------------------------
    def to_json_dict(self) -> dict:
        plan = None
        if self.plan is not None:
            plan = {
                "boundaries": list(self.plan.boundaries),
                "phi": list(self.plan.phi),
                "eta_max": list(self.plan.eta_max),
            }
            if self.plan.k_offset:
                plan["k_offset"] = self.plan.k_offset
        return {
            "kind": self.kind,
            "eta_min": self.eta_min,
            "total_steps": self.total_steps,
            "warmup_fraction": self.warmup_fraction,
            "plan": plan,
            "baseline_params": dict(self.baseline_params),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2)

    @classmethod
    def from_json_dict(cls, doc: Mapping) -> "ScheduleSpec":
        if not isinstance(doc, Mapping):
            raise InvalidSpecError(f"spec document must be an object, got {type(doc).__name__}")
        plan_doc = doc.get("plan")
        plan = None
        if plan_doc is not None:
            try:
                plan = PhasePlan(
                    boundaries=tuple(plan_doc["boundaries"]),
                    phi=tuple(plan_doc["phi"]),
                    eta_max=tuple(plan_doc["eta_max"]),
                    k_offset=int(plan_doc.get("k_offset", 0)),
                )
            except (KeyError, TypeError) as exc:
                raise InvalidSpecError(f"malformed plan object: {exc}") from exc
        try:
            return cls(
                kind=doc["kind"],
                total_steps=int(doc["total_steps"]),
                eta_min=float(doc.get("eta_min", 0.0)),
                warmup_fraction=float(doc.get("warmup_fraction", 0.0)),
                plan=plan,
                baseline_params=dict(doc.get("baseline_params", {})),
            )
        except (KeyError, TypeError) as exc:
            raise InvalidSpecError(f"malformed spec document: {exc}") from exc

    @classmethod
    def from_json(cls, text: str) -> "ScheduleSpec":
        return cls.from_json_dict(json.loads(text))


@dataclass(frozen=True)
class RateTrace:
    """Per-step rates for t = 1..total_steps."""

    rates: tuple[float, ...]

    def write_csv(self, out: IO[str]) -> None:
        out.write("step,lr\n")
        for i, r in enumerate(self.rates, start=1):
            out.write(f"{i},{format(r, '.12g')}\n")

    def csv_text(self) -> str:
        import io

        buf = io.StringIO()
        self.write_csv(buf)
        return buf.getvalue()


def uba_rate(t: int, plan: PhasePlan, eta_min: float) -> float:
    """Rate at 1-indexed step ``t`` of a phase plan.

    Raises OutOfRangeError when ``t`` is outside [1, final boundary].  The
    0/0 arising at phi=0 when cos theta = -1 resolves to eta_max_k by
    continuity (phi=0 is constant at eta_max_k at every other step).
    """
    k = plan.phase_of(t)
    t_lo, t_hi = plan.boundaries[k - 1], plan.boundaries[k]
    n = t_hi - t_lo
    phi = plan.phi[k - 1]
    eta_max = plan.eta_max[k - 1]
    k_eff = k + plan.k_offset
    theta = (2 * (t - t_lo) - 1) * math.pi / (2 * n) + (k_eff - 1) * math.pi
    c = 1.0 + math.cos(theta)
    denom = 2.0 * phi + (2.0 - phi) * c
    if denom == 0.0:
        return eta_max
    return (eta_max - eta_min) * 2.0 * c / denom + eta_min


def _baseline_value(kind: str, params: Mapping[str, float], eta_min: float,
                    t: float, total: int) -> float:
    """Shared closed forms for the non-UBA kinds, evaluated at 0 <= t <= total."""
    eta0 = float(params["eta0"])
    x = t / total
    if kind == "Step":
        # decay by 10x after 50% and again after 75% of the budget
        if x < 0.5:
            return eta0
        if x < 0.75:
            return eta0 * 0.1
        return eta0 * 0.01
    if kind == "Cosine":
        return eta_min + 0.5 * (eta0 - eta_min) * (1.0 + math.cos(x * math.pi))
    if kind == "LinearBT":
        return eta0 * (1.0 - x)
    if kind == "REX":
        rem = 1.0 - x
        return eta0 * rem / (0.5 + 0.5 * rem)
    if kind == "Cyclic":
        periods = int(params.get("periods", 2))
        period = total / periods
        pos = (t % period) / period  # in [0, 1)
        tri = 1.0 - abs(2.0 * pos - 1.0)
        return eta_min + (eta0 - eta_min) * tri
    if kind == "OneCycle":
        pct = float(params.get("pct_start", 0.3))
        split = pct * total
        if t <= split:
            frac = t / split if split > 0 else 1.0
            return eta_min + (eta0 - eta_min) * frac
        frac = (t - split) / (total - split)
        return eta0 - (eta0 - eta_min) * frac
    raise InvalidSpecError(f"unknown baseline kind {kind!r}")


def baseline_rate(spec: ScheduleSpec, t: float) -> float:
    """Closed-form baseline rate at step t in [0, total_steps]."""
    if spec.kind == "UBA":
        raise InvalidSpecError("baseline_rate does not apply to UBA specs")
    if not 0 <= t <= spec.total_steps:
        raise OutOfRangeError(f"step {t} outside [0, {spec.total_steps}]")
    return _baseline_value(spec.kind, spec.baseline_params, spec.eta_min,
                           t, spec.total_steps)


def _proper_rate(spec: ScheduleSpec, t: int, span: int) -> float:
    """Rate of the schedule proper at 1-indexed step t of a span-step run."""
    if spec.kind == "UBA":
        return uba_rate(t, spec.plan, spec.eta_min)
    return _baseline_value(spec.kind, spec.baseline_params, spec.eta_min,
                           t, span)


def trace(spec: ScheduleSpec) -> RateTrace:
    """Full per-step rate trace including the warmup ramp.

    Warmup covers the first floor(warmup_fraction * T) steps, rising
    linearly from zero and reaching the schedule's first post-warmup value
    on the ramp's last step; the schedule proper then runs over the
    remaining steps.  Kinds with an intrinsic ascending start (OneCycle,
    Cyclic) keep their own ramp and ignore the warmup fraction.
    """
    total = spec.total_steps
    w = spec.warmup_steps
    span = total - w
    rates = []
    if w > 0:
        target = _proper_rate(spec, 1, span)
        rates.extend(target * s / w for s in range(1, w + 1))
    rates.extend(_proper_rate(spec, t, span) for t in range(1, span + 1))
    return RateTrace(rates=tuple(rates))


def phi_decay_sequence(phi0: float, n_phases: int, rho: float = 0.8) -> tuple[float, ...]:
    """Per-phase shape values phi_k = phi0 * rho**k for phases k = 1..n_phases.

    Dropping phi as phases progress makes later phases decay more gently;
    the default rho matches the reference multi-phase configuration.
    """
    if n_phases < 1:
        raise InvalidSpecError("n_phases must be >= 1")
    if phi0 < 0 or rho <= 0:
        raise InvalidSpecError("phi0 must be >= 0 and rho > 0")
    return tuple(phi0 * rho ** k for k in range(1, n_phases + 1))


def _even_boundaries(total: int, parts: int) -> tuple[int, ...]:
    if total < parts:
        raise InvalidSpecError(
            f"total_steps {total} cannot host {parts} phases")
    return tuple(round(i * total / parts) for i in range(parts + 1))


def mimic(target: str, total_steps: int, *, eta_max: float = 1.0,
          eta_min: float = 0.0, segments: int = 2, cycles: int = 2,
          pct_start: float = 0.3) -> ScheduleSpec:
    """UBA spec that reproduces a conventional schedule's shape.

    Shape dictionary: Cosine -> phi=2; Exponential -> phi=30; REX -> phi=0.8;
    Step -> phi=0 with eta_max halving per segment; Cyclic -> phi=2 phases
    alternating ascent/descent (2*cycles phases); OneCycle -> phi=2 with an
    ascending pct_start segment then a descending remainder.
    """
    single = {"Cosine": 2.0, "Exponential": 30.0, "REX": 0.8}
    if target in single:
        plan = PhasePlan(boundaries=(0, total_steps), phi=(single[target],),
                         eta_max=(eta_max,))
    elif target == "Step":
        if segments < 1:
            raise InvalidSpecError("segments must be >= 1")
        plan = PhasePlan(
            boundaries=_even_boundaries(total_steps, segments),
            phi=(0.0,) * segments,
            eta_max=tuple(eta_max * 0.5 ** k for k in range(1, segments + 1)),
        )
    elif target == "Cyclic":
        if cycles < 1:
            raise InvalidSpecError("cycles must be >= 1")
        parts = 2 * cycles
        plan = PhasePlan(
            boundaries=_even_boundaries(total_steps, parts),
            phi=(2.0,) * parts,
            eta_max=(eta_max,) * parts,
            k_offset=1,  # start ascending
        )
    elif target == "OneCycle":
        split = round(pct_start * total_steps)
        if not 0 < split < total_steps:
            raise InvalidSpecError(
                f"pct_start {pct_start} leaves an empty segment for "
                f"total_steps {total_steps}")
        plan = PhasePlan(boundaries=(0, split, total_steps), phi=(2.0, 2.0),
                         eta_max=(eta_max, eta_max), k_offset=1)
    else:
        raise InvalidSpecError(
            f"unknown mimic target {target!r}; expected Cosine, Exponential, "
            "REX, Step, Cyclic, or OneCycle")
    return ScheduleSpec(kind="UBA", total_steps=total_steps, eta_min=eta_min,
                        plan=plan)
