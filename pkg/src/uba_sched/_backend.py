"""Kernel backend selection.

The compiled extension is preferred when present; the numpy fallback keeps
the package fully functional in pure-Python installs.  Set
``UBA_SCHED_BACKEND=numpy`` (or ``python``) to force the fallback, or
``UBA_SCHED_BACKEND=cython`` to require the extension (raising if missing).
"""
import os

_requested = os.environ.get("UBA_SCHED_BACKEND", "").strip().lower()

if _requested in ("numpy", "python"):
    from . import _kernels_py as kernels
elif _requested == "cython":
    from . import _kernels as kernels  # type: ignore[attr-defined]
else:
    try:
        from . import _kernels as kernels  # type: ignore[attr-defined]
    except ImportError:
        from . import _kernels_py as kernels

BACKEND = kernels.BACKEND_NAME

log_objective = kernels.log_objective
log_objective_grid = kernels.log_objective_grid
evolve_gaps = kernels.evolve_gaps
