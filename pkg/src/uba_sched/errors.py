"""Exception types shared across the package."""


class InvalidSpecError(ValueError):
    """A schedule spec, problem, or config violates a structural invariant."""


class OutOfRangeError(ValueError):
    """An iteration index falls outside the domain of the schedule."""


class PhiNearTwoError(ValueError):
    """Bound evaluation requested inside the excluded window around phi = 2.

    Both bound branches divide by (phi - 2); use the cosine closed form
    for phi = 2 instead of the branch formulas.
    """


class ReductionRefusedError(ValueError):
    """A fit failed the scaling relation gate and cannot be reduced to phi."""
