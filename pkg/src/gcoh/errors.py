"""Exception hierarchy shared by all modules."""


class GaussianError(Exception):
    """Base class for all errors raised by this package."""


class DimensionError(GaussianError, ValueError):
    """Matrix or vector shapes are inconsistent with the requested operation."""


class PhysicalityError(GaussianError, ValueError):
    """A covariance matrix violates the uncertainty relation."""


class UnsupportedError(GaussianError, ValueError):
    """The input lies outside the class of states or measurements an operation serves."""


class LimitError(UnsupportedError):
    """An operation is undefined in the exact homodyne limit."""


class TruncationError(GaussianError, RuntimeError):
    """Fock-space truncation is too small for the requested accuracy."""


class InstabilityError(GaussianError, RuntimeError):
    """Dynamics has no steady state or an integration did not converge."""


class StepSizeError(GaussianError, ValueError):
    """Integration step too large for the drift time scale."""
