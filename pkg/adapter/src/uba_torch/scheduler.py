"""PyTorch scheduler binding for UBA schedules.

Kept in its own module so that :mod:`uba_torch.core` stays importable
without torch installed.
"""
from __future__ import annotations

import warnings

from .core import SpecError, parse_spec, schedule_rates

try:
    from torch.optim.lr_scheduler import LRScheduler as _Base
except ImportError:  # torch < 2.0 spells it with an underscore
    from torch.optim.lr_scheduler import _LRScheduler as _Base


class UBAScheduler(_Base):
    """Step-wise scheduler that follows a UBA (or baseline) spec's trace.

    ``spec`` is an in-memory document or a path, same schema as
    :class:`uba_torch.core.AdapterConfig`.  ``last_step`` resumes from a
    checkpoint: with ``last_step = s`` the first applied rate is trace row
    ``s + 1`` (fresh runs pass -1 and start at row 1).  Group 0's rate
    equals the trace exactly; other groups keep their ratio to group 0.

    Stepping past ``total_steps`` holds the final rate and warns once.
    """

    def __init__(self, optimizer, spec, last_step: int = -1):
        if isinstance(spec, str) or hasattr(spec, "__fspath__"):
            import json

            with open(spec, "r", encoding="utf-8") as fh:
                spec = json.load(fh)
        self._spec = parse_spec(spec)
        self._trace = schedule_rates(self._spec)
        last_step = int(last_step)
        if last_step < -1:
            raise SpecError(f"last_step must be >= -1, got {last_step}")
        self._resume_offset = max(last_step, 0)
        self._warned_past_end = False
        anchor = optimizer.param_groups[0]["lr"]
        if not anchor > 0:
            raise SpecError(
                f"param group 0 needs a positive lr to anchor scaling, got {anchor}")
        # base class runs an initial step(), so attributes must exist first
        super().__init__(optimizer, last_epoch=-1)

    def get_lr(self):
        row = self._resume_offset + self.last_epoch + 1
        total = self._spec["total_steps"]
        if row > total:
            if not self._warned_past_end:
                self._warned_past_end = True
                warnings.warn(
                    f"step {row} is beyond the {total}-step budget; "
                    "holding the final rate", RuntimeWarning, stacklevel=2)
            row = total
        rate = self._trace[row - 1]
        scale = rate / self.base_lrs[0]
        return [base * scale for base in self.base_lrs]
