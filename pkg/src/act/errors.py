"""Exception types shared across the toolkit."""


class ActError(Exception):
    """Base class for all toolkit errors."""


class InvalidConfig(ActError):
    """A configuration value violates its documented constraints."""


class RoiOutOfBounds(ActError):
    """A region of interest does not fit inside the frame."""


class NonMonotonicTimestamp(ActError):
    """A sample arrived with a timestamp not strictly after the previous one."""


class AliasedSample(ActError):
    """An angular step of exactly pi: rotation direction is ambiguous at this frame rate."""


class InsufficientSamples(ActError):
    """Not enough samples in the requested window to compute a statistic."""


class InvalidActualAngle(ActError):
    """A commanded tilt angle is outside the valid range or violates the one-axis convention."""


class MalformedNumeral(ActError):
    """Recognized text passed the confidence gate but is not a signed decimal."""


class PlanError(ActError):
    """A test plan document is structurally invalid."""
