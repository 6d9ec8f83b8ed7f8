"""Exception hierarchy shared across the flume, force, structural and UQ layers."""


class FlumeError(Exception):
    """Base class for all package errors."""


class InvalidGeometry(FlumeError):
    """Scenario geometry has a non-positive or inconsistent dimension."""


class ResolutionTooCoarse(FlumeError):
    """Fewer than four particles across the target wave height (H/dp < 4)."""


class NonFiniteRate(FlumeError):
    """A NaN/Inf appeared in the continuity or momentum rates (solver blow-up)."""


class UnphysicalState(FlumeError):
    """A particle reached non-positive density; the run cannot continue."""


class CflViolation(FlumeError):
    """Requested time step exceeds the stable CFL step."""


class CoefficientOutOfRange(FlumeError):
    """Pressure coefficient outside the code-permitted 1.6 - 3.5 band."""


class NonPositiveDepth(FlumeError):
    """Froude number requested for depth <= 0."""


class LengthMismatch(FlumeError):
    """Time-aligned traces differ in length."""


class InvalidParams(FlumeError):
    """Structural parameters violate positivity."""


class NonConvergence(FlumeError):
    """Newton iteration on the nonlinear springs failed within the cap."""


class TimestepTooCoarse(FlumeError):
    """Integration step too large relative to the fundamental period."""


class EmptyHistory(FlumeError):
    """EDP extraction on an empty response history."""


class InvalidSpec(FlumeError):
    """Random-variable specification violates its distribution constraints."""


class DomainError(FlumeError):
    """Quantile requested outside the open interval (0, 1)."""


class TooFewSamples(FlumeError):
    """Not enough samples for the requested density estimate."""


class MissingInput(FlumeError):
    """A required input file or directory is absent."""


class PropagationError(FlumeError):
    """More than the tolerated fraction of UQ sample rows failed."""
