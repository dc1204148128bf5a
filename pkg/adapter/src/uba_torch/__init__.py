"""UBA schedules for step-wise training loops.

The core (spec parsing, per-step rates, CSV export) is pure Python with
no dependencies; the PyTorch binding lives in :mod:`uba_torch.scheduler`
and is loaded lazily so importing this package never drags torch in.
"""
from .core import (
    SCHEDULE_KINDS,
    AdapterConfig,
    SpecError,
    parse_spec,
    schedule_rates,
    step_rate,
)

__all__ = [
    "SCHEDULE_KINDS",
    "AdapterConfig",
    "SpecError",
    "UBAScheduler",
    "parse_spec",
    "schedule_rates",
    "step_rate",
]


def __getattr__(name: str):
    if name == "UBAScheduler":
        from .scheduler import UBAScheduler

        return UBAScheduler
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")
