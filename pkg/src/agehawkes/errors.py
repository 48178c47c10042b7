"""Exception types shared across the analytics, simulation, and PDE engines.

The CLI reports these by name (with the ``Error`` suffix stripped), so the
class names are part of the command-line contract.
"""


class AgeHawkesError(Exception):
    """Base class for all package errors."""


class InvalidParamsError(AgeHawkesError, ValueError):
    """Model parameters outside the supported domain."""


class DivergentError(AgeHawkesError):
    """Requested quantity has no finite value at these parameters."""


class BracketFailureError(AgeHawkesError):
    """Root bracket lost its sign change; indicates an implementation bug."""


class InvalidConfigError(AgeHawkesError, ValueError):
    """Network configuration violates its invariants."""


class InvalidStopRuleError(AgeHawkesError, ValueError):
    """Simulation stop rule missing or non-positive."""


class BoundViolationError(AgeHawkesError):
    """Thinning bound exceeded by the total intensity; indicates a bug."""


class InsufficientDataError(AgeHawkesError):
    """Spike record too short or window empty for the requested estimate."""


class InvalidInitialDensityError(AgeHawkesError, ValueError):
    """Initial age density does not integrate to one on the grid."""


class NonFiniteStateError(AgeHawkesError):
    """PDE state became non-finite; signals numerical instability."""


class NotConvergedError(AgeHawkesError):
    """Relaxation to stationarity did not meet tolerance before max time."""
