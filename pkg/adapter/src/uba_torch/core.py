"""Framework-free core of the adapter: spec parsing and per-step rates.

This module deliberately re-implements the UBA rate formula and the
baseline closed forms instead of depending on the uba-sched package, so
that a training job only needs this tiny pure-Python install.  The trade
is pinned by tests: rates must agree with `uba-sched trace` output to
1e-12 per step, and the CSV written by :meth:`AdapterConfig.export_trace`
is byte-identical to the CLI's.

Specs use the same JSON schema as uba-sched: ``kind``, ``total_steps``,
``eta_min``, ``warmup_fraction``, plus either a ``plan`` object (UBA) or
``baseline_params`` (everything else).
"""
from __future__ import annotations

import json
import math
import os
import warnings
from typing import IO, Mapping, Sequence

SCHEDULE_KINDS = ("UBA", "Step", "Cosine", "Cyclic", "OneCycle", "LinearBT", "REX")

# kinds whose first segment already rises; they ignore warmup_fraction
_ASCENDING_START_KINDS = ("OneCycle", "Cyclic")


class SpecError(ValueError):
    """Raised when a schedule document violates the shared schema."""


def _fail(msg: str) -> None:
    raise SpecError(msg)


def _as_number(doc: Mapping, key: str, default=None) -> float:
    val = doc.get(key, default)
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        _fail(f"{key} must be a number, got {val!r}")
    return float(val)


def _validate_plan(plan, eta_min: float, covered: int) -> dict:
    if not isinstance(plan, Mapping):
        _fail("plan must be an object")
    try:
        boundaries = tuple(int(b) for b in plan["boundaries"])
    except (KeyError, TypeError, ValueError) as exc:
        raise SpecError(f"plan.boundaries malformed: {exc}") from exc
    if len(boundaries) < 2:
        _fail("plan needs at least one phase (two boundaries)")
    if boundaries[0] != 0:
        _fail(f"first boundary must be 0, got {boundaries[0]}")
    if any(x >= y for x, y in zip(boundaries, boundaries[1:])):
        _fail(f"boundaries must be strictly increasing: {boundaries}")
    if boundaries[-1] != covered:
        _fail(f"plan covers {boundaries[-1]} steps but {covered} post-warmup "
              "steps are required")
    n_phases = len(boundaries) - 1
    try:
        phi = tuple(float(p) for p in plan["phi"])
        eta_max = tuple(float(e) for e in plan["eta_max"])
    except (KeyError, TypeError, ValueError) as exc:
        raise SpecError(f"plan phi/eta_max malformed: {exc}") from exc
    if len(phi) != n_phases or len(eta_max) != n_phases:
        _fail(f"phi and eta_max must have one entry per phase ({n_phases}), "
              f"got {len(phi)} and {len(eta_max)}")
    if any(p < 0 for p in phi):
        _fail(f"phi values must be non-negative: {phi}")
    if any(e <= eta_min for e in eta_max):
        _fail(f"every eta_max ({eta_max}) must exceed eta_min ({eta_min})")
    k_offset = plan.get("k_offset", 0)
    if isinstance(k_offset, bool) or not isinstance(k_offset, int):
        _fail(f"k_offset must be an integer, got {k_offset!r}")
    return {"boundaries": boundaries, "phi": phi, "eta_max": eta_max,
            "k_offset": k_offset}


def parse_spec(doc: Mapping) -> dict:
    """Validate a spec document and return a normalized copy.

    Mirrors the uba-sched constructor rules; anything it accepts here
    produces the same trace over there.
    """
    if not isinstance(doc, Mapping):
        _fail(f"spec document must be an object, got {type(doc).__name__}")
    kind = doc.get("kind")
    if kind not in SCHEDULE_KINDS:
        _fail(f"unknown schedule kind {kind!r}; expected one of {SCHEDULE_KINDS}")
    total = doc.get("total_steps")
    if isinstance(total, bool) or not isinstance(total, int):
        _fail(f"total_steps must be an integer, got {total!r}")
    if total < 1:
        _fail(f"total_steps must be positive, got {total}")
    eta_min = _as_number(doc, "eta_min", 0.0)
    if eta_min < 0:
        _fail(f"eta_min must be >= 0, got {eta_min}")
    warmup = _as_number(doc, "warmup_fraction", 0.0)
    if not 0.0 <= warmup < 1.0:
        _fail(f"warmup_fraction must lie in [0, 1), got {warmup}")
    out = {"kind": kind, "total_steps": total, "eta_min": eta_min,
           "warmup_fraction": warmup, "plan": None, "baseline_params": {}}
    if kind == "UBA":
        w = int(warmup * total)
        out["plan"] = _validate_plan(doc.get("plan"), eta_min, total - w)
    else:
        if doc.get("plan") is not None:
            _fail("phase plans apply only to UBA specs")
        params = doc.get("baseline_params")
        if not isinstance(params, Mapping) or "eta0" not in params:
            _fail(f"{kind} spec requires baseline_params['eta0']")
        out["baseline_params"] = dict(params)
    return out


def _warmup_steps(spec: Mapping) -> int:
    if spec["kind"] in _ASCENDING_START_KINDS:
        return 0
    return int(spec["warmup_fraction"] * spec["total_steps"])


def _uba_rate(t: int, plan: Mapping, eta_min: float) -> float:
    # phase k covers (T_k, T_{k+1}]; scan is cheap, plans have few phases
    boundaries = plan["boundaries"]
    k = next(i + 1 for i in range(len(boundaries) - 1) if t <= boundaries[i + 1])
    t_lo, t_hi = boundaries[k - 1], boundaries[k]
    n = t_hi - t_lo
    phi = plan["phi"][k - 1]
    eta_max = plan["eta_max"][k - 1]
    k_eff = k + plan["k_offset"]
    theta = (2 * (t - t_lo) - 1) * math.pi / (2 * n) + (k_eff - 1) * math.pi
    c = 1.0 + math.cos(theta)
    denom = 2.0 * phi + (2.0 - phi) * c
    if denom == 0.0:
        return eta_max  # phi=0 at cos theta = -1, constant branch
    return (eta_max - eta_min) * 2.0 * c / denom + eta_min


def _baseline_value(kind: str, params: Mapping, eta_min: float,
                    t: float, total: int) -> float:
    eta0 = float(params["eta0"])
    x = t / total
    if kind == "Step":
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
        pos = (t % period) / period
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
    raise SpecError(f"unknown baseline kind {kind!r}")


def _proper_rate(spec: Mapping, t: int, span: int) -> float:
    if spec["kind"] == "UBA":
        return _uba_rate(t, spec["plan"], spec["eta_min"])
    return _baseline_value(spec["kind"], spec["baseline_params"],
                           spec["eta_min"], t, span)


def schedule_rates(spec: Mapping) -> tuple[float, ...]:
    """Per-step rates for t = 1..total_steps, warmup ramp included."""
    total = spec["total_steps"]
    w = _warmup_steps(spec)
    span = total - w
    rates = []
    if w > 0:
        target = _proper_rate(spec, 1, span)
        rates.extend(target * s / w for s in range(1, w + 1))
    rates.extend(_proper_rate(spec, t, span) for t in range(1, span + 1))
    return tuple(rates)


class AdapterConfig:
    """Schedule spec plus a resume cursor, ready to drive an optimizer.

    ``spec`` is either an in-memory document (mapping) or a path to the
    shared JSON spec file.  ``last_step`` is the 1-indexed count of steps
    already taken; -1 (or 0) means a fresh run, so the next call to
    :func:`step_rate` yields the rate for step ``last_step + 1``.
    """

    def __init__(self, spec, last_step: int = -1):
        if isinstance(spec, (str, os.PathLike)):
            with open(spec, "r", encoding="utf-8") as fh:
                doc = json.load(fh)
        elif isinstance(spec, Mapping):
            doc = spec
        else:
            _fail(f"spec must be a mapping or a path, got {type(spec).__name__}")
        self.spec = parse_spec(doc)
        last_step = int(last_step)
        if last_step < -1:
            _fail(f"last_step must be >= -1, got {last_step}")
        self.last_step = last_step
        self.rates = schedule_rates(self.spec)
        self._warned_past_end = False

    @property
    def total_steps(self) -> int:
        return self.spec["total_steps"]

    def rate_at(self, step: int) -> float:
        """Trace rate at 1-indexed ``step``, clamped to the final step.

        Stepping past the budget warns once per adapter and then keeps
        returning the final rate.
        """
        if step < 1:
            _fail(f"step must be >= 1, got {step}")
        if step > self.total_steps:
            if not self._warned_past_end:
                self._warned_past_end = True
                warnings.warn(
                    f"step {step} is beyond the {self.total_steps}-step "
                    "budget; holding the final rate", RuntimeWarning,
                    stacklevel=3)
            step = self.total_steps
        return self.rates[step - 1]

    def export_trace(self, path) -> None:
        """Write the full trace as CSV, byte-identical to `uba-sched trace`."""
        with open(path, "w", encoding="utf-8", newline="") as fh:
            _write_trace_csv(fh, self.rates)

    def state_dict(self) -> dict:
        return {"last_step": self.last_step,
                "warned_past_end": self._warned_past_end}

    def load_state_dict(self, state: Mapping) -> None:
        self.last_step = int(state["last_step"])
        self._warned_past_end = bool(state.get("warned_past_end", False))


def _write_trace_csv(out: IO[str], rates: Sequence[float]) -> None:
    out.write("step,lr\n")
    for i, r in enumerate(rates, start=1):
        out.write(f"{i},{format(r, '.12g')}\n")


def step_rate(state: AdapterConfig, base_rates: Sequence[float]) -> list[float]:
    """Advance one step and return the per-group rates.

    Group 0 follows the trace exactly; every other group keeps its ratio
    to group 0's base rate.  Call once per optimizer step.
    """
    base = [float(b) for b in base_rates]
    if not base:
        _fail("base_rates must be non-empty")
    if base[0] <= 0:
        _fail(f"base_rates[0] must be positive to anchor scaling, got {base[0]}")
    state.last_step = max(state.last_step, 0) + 1
    rate = state.rate_at(state.last_step)
    scale = rate / base[0]
    return [b * scale for b in base]
