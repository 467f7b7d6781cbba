"""Exception hierarchy.

``NumericalFailure`` subclasses map to CLI exit code 2, ``InvariantViolation``
to exit code 3 and ``ValueError`` (bad input) to exit code 1.
"""


class NumericalFailure(RuntimeError):
    """A computation could not produce its result at the requested accuracy."""


class StepUnderflow(NumericalFailure):
    def __init__(self, radius):
        super().__init__(f"step size underflow at r = {radius:.17g}")
        self.radius = radius


class GrazingZero(NumericalFailure):
    def __init__(self, radius):
        super().__init__(f"tangential zero of u near r = {radius:.17g} (tolerance starvation)")
        self.radius = radius


class NoZeroFound(NumericalFailure):
    """Center shoot stayed positive up to r_max."""


class ZeroCountNotReached(NumericalFailure):
    def __init__(self, found, wanted, r_end):
        super().__init__(f"only {found} of {wanted} zeros before r = {r_end:.6g}")
        self.found = found
        self.wanted = wanted
        self.r_end = r_end


class IndicatorNotBracketed(NumericalFailure):
    pass


class TailTooShort(NumericalFailure):
    pass


class BoundsViolated(NumericalFailure):
    pass


class NoSignChange(NumericalFailure):
    pass


class RegionError(NumericalFailure):
    """A nodal region is not admissible for the weighted energy."""

    def __init__(self, message, region_index=None):
        if region_index is not None:
            message = f"region {region_index}: {message}"
        super().__init__(message)
        self.region_index = region_index


class InvariantViolation(AssertionError):
    """An internal self-check failed."""
