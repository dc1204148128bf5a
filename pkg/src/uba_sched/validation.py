"""Document validation with JSON-pointer diagnostics.

These validators mirror the constructor rules of the domain types exactly,
but walk raw JSON documents and report every violation at once instead of
raising on the first.  A document that validates clean is guaranteed to
construct; a constructed object serializes to a document that validates
clean.  Diagnostics are plain data so callers decide how to present them.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Mapping

from .schedule import SCHEDULE_KINDS


@dataclass(frozen=True)
class Diagnostic:
    """One invariant violation, addressed by a JSON pointer into the doc."""

    path: str
    message: str

    def __str__(self):
        return f"{self.path or '/'}: {self.message}"


def _is_number(x: Any) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool)


def _is_integer(x: Any) -> bool:
    return isinstance(x, int) and not isinstance(x, bool)


def _check_number(doc, key, out, prefix="", required=False):
    if key not in doc:
        if required:
            out.append(Diagnostic(f"{prefix}/{key}", "required field is missing"))
        return None
    if not _is_number(doc[key]):
        out.append(Diagnostic(f"{prefix}/{key}", "must be a number"))
        return None
    return float(doc[key])


def _validate_plan(plan: Any, total_covered: int | None,
                   eta_min: float | None, out: list) -> None:
    if not isinstance(plan, Mapping):
        out.append(Diagnostic("/plan", "must be an object"))
        return

    boundaries = plan.get("boundaries")
    n_phases = None
    if boundaries is None:
        out.append(Diagnostic("/plan/boundaries", "required field is missing"))
    elif (not isinstance(boundaries, (list, tuple))
          or not all(_is_integer(b) for b in boundaries)):
        out.append(Diagnostic("/plan/boundaries", "must be a list of integers"))
    else:
        n_phases = len(boundaries) - 1
        if len(boundaries) < 2:
            out.append(Diagnostic(
                "/plan/boundaries", "needs at least two entries (one phase)"))
        else:
            if boundaries[0] != 0:
                out.append(Diagnostic(
                    "/plan/boundaries", f"first boundary must be 0, got {boundaries[0]}"))
            if any(x >= y for x, y in zip(boundaries, boundaries[1:])):
                out.append(Diagnostic(
                    "/plan/boundaries", "boundaries must be strictly increasing"))
            elif total_covered is not None and boundaries[-1] != total_covered:
                out.append(Diagnostic(
                    "/plan/boundaries",
                    f"plan covers {boundaries[-1]} steps but {total_covered} "
                    "post-warmup steps are required"))

    for field in ("phi", "eta_max"):
        values = plan.get(field)
        if values is None:
            out.append(Diagnostic(f"/plan/{field}", "required field is missing"))
            continue
        if not isinstance(values, (list, tuple)) or not all(_is_number(v) for v in values):
            out.append(Diagnostic(f"/plan/{field}", "must be a list of numbers"))
            continue
        if n_phases is not None and len(values) != n_phases:
            out.append(Diagnostic(
                f"/plan/{field}", f"must have one entry per phase ({n_phases}), "
                f"got {len(values)}"))
        for i, v in enumerate(values):
            if field == "phi" and v < 0:
                out.append(Diagnostic(f"/plan/phi/{i}", "must be non-negative"))
            if field == "eta_max":
                if v <= 0:
                    out.append(Diagnostic(f"/plan/eta_max/{i}", "must be positive"))
                elif eta_min is not None and v <= eta_min:
                    out.append(Diagnostic(
                        f"/plan/eta_max/{i}", f"must exceed eta_min ({eta_min})"))

    if "k_offset" in plan and not _is_integer(plan["k_offset"]):
        out.append(Diagnostic("/plan/k_offset", "must be an integer"))


def validate_spec_document(doc: Any) -> list[Diagnostic]:
    """All invariant violations of a ScheduleSpec JSON document."""
    if not isinstance(doc, Mapping):
        return [Diagnostic("", "spec document must be an object")]
    out: list[Diagnostic] = []

    kind = doc.get("kind")
    if kind is None:
        out.append(Diagnostic("/kind", "required field is missing"))
    elif kind not in SCHEDULE_KINDS:
        out.append(Diagnostic(
            "/kind", f"unknown kind {kind!r}; expected one of {SCHEDULE_KINDS}"))

    total = None
    if "total_steps" not in doc:
        out.append(Diagnostic("/total_steps", "required field is missing"))
    elif not _is_integer(doc["total_steps"]):
        out.append(Diagnostic("/total_steps", "must be an integer"))
    elif doc["total_steps"] < 1:
        out.append(Diagnostic("/total_steps", "must be positive"))
    else:
        total = doc["total_steps"]

    eta_min = _check_number(doc, "eta_min", out)
    if eta_min is not None and eta_min < 0:
        out.append(Diagnostic("/eta_min", "must be >= 0"))
        eta_min = None
    if "eta_min" not in doc:
        eta_min = 0.0

    warmup = _check_number(doc, "warmup_fraction", out)
    if warmup is not None and not 0.0 <= warmup < 1.0:
        out.append(Diagnostic("/warmup_fraction", "must lie in [0, 1)"))
        warmup = None
    if "warmup_fraction" not in doc:
        warmup = 0.0

    plan = doc.get("plan")
    if kind == "UBA":
        if plan is None:
            out.append(Diagnostic("/plan", "UBA spec requires a phase plan"))
        else:
            covered = None
            if total is not None and warmup is not None:
                covered = total - int(warmup * total)
            _validate_plan(plan, covered, eta_min, out)
    elif kind in SCHEDULE_KINDS:
        if plan is not None:
            out.append(Diagnostic("/plan", "phase plans apply only to UBA specs"))
        params = doc.get("baseline_params")
        if params is None:
            out.append(Diagnostic(
                "/baseline_params", f"{kind} spec requires baseline_params"))
        elif not isinstance(params, Mapping):
            out.append(Diagnostic("/baseline_params", "must be an object"))
        elif "eta0" not in params:
            out.append(Diagnostic("/baseline_params/eta0", "required field is missing"))
        elif not _is_number(params["eta0"]):
            out.append(Diagnostic("/baseline_params/eta0", "must be a number"))
    return out


def validate_problem_document(doc: Any) -> list[Diagnostic]:
    """All invariant violations of a min-max problem JSON document."""
    if not isinstance(doc, Mapping):
        return [Diagnostic("", "problem document must be an object")]
    out: list[Diagnostic] = []

    if "n_steps" not in doc:
        out.append(Diagnostic("/n_steps", "required field is missing"))
    elif not _is_integer(doc["n_steps"]):
        out.append(Diagnostic("/n_steps", "must be an integer"))
    elif doc["n_steps"] < 1:
        out.append(Diagnostic("/n_steps", "must be positive"))

    lam_lo = _check_number(doc, "lambda_lo", out, required=True)
    lam_hi = _check_number(doc, "lambda_hi", out, required=True)
    if lam_lo is not None and lam_lo <= 0:
        out.append(Diagnostic("/lambda_lo", "must be positive"))
    elif lam_lo is not None and lam_hi is not None and lam_hi < lam_lo:
        out.append(Diagnostic("/lambda_hi", "must be >= lambda_lo"))

    eta_lo = _check_number(doc, "eta_lo", out, required=True)
    eta_hi = _check_number(doc, "eta_hi", out, required=True)
    if eta_lo is not None and eta_lo < 0:
        out.append(Diagnostic("/eta_lo", "must be >= 0"))
    elif eta_lo is not None and eta_hi is not None and eta_hi <= eta_lo:
        out.append(Diagnostic("/eta_hi", "must exceed eta_lo"))
    return out


def validate_model_document(doc: Any) -> list[Diagnostic]:
    """All invariant violations of a quadratic-model JSON document."""
    if not isinstance(doc, Mapping):
        return [Diagnostic("", "model document must be an object")]
    out: list[Diagnostic] = []

    spectrum = doc.get("spectrum")
    if spectrum is None:
        out.append(Diagnostic("/spectrum", "required field is missing"))
    elif not isinstance(spectrum, (list, tuple)) or not spectrum:
        out.append(Diagnostic("/spectrum", "must be a non-empty list"))
    else:
        for i, lam in enumerate(spectrum):
            if not _is_number(lam) or lam <= 0:
                out.append(Diagnostic(f"/spectrum/{i}", "must be a positive number"))

    coeffs = doc.get("init_coeffs")
    if coeffs is None:
        out.append(Diagnostic("/init_coeffs", "required field is missing"))
    elif not isinstance(coeffs, (list, tuple)):
        out.append(Diagnostic("/init_coeffs", "must be a list of numbers"))
    else:
        if (isinstance(spectrum, (list, tuple)) and spectrum
                and len(coeffs) != len(spectrum)):
            out.append(Diagnostic(
                "/init_coeffs", "must match the spectrum length"))
        for i, c in enumerate(coeffs):
            if not _is_number(c):
                out.append(Diagnostic(f"/init_coeffs/{i}", "must be a number"))

    sigma = _check_number(doc, "sigma", out)
    if sigma is not None and sigma < 0:
        out.append(Diagnostic("/sigma", "must be non-negative"))

    if "seed" in doc:
        seed = doc["seed"]
        if not _is_integer(seed) or not 0 <= seed < 2 ** 64:
            out.append(Diagnostic("/seed", "must be an unsigned 64-bit integer"))
    return out
