"""Exception types raised across the package."""


class HaarPermError(Exception):
    """Base class for all errors raised by haarperm."""


class ValidationError(HaarPermError, ValueError):
    """Malformed input: bad address, non-bijective map, bad file contents."""


class EmptyCollection(HaarPermError, ValueError):
    pass


class EmptyInput(HaarPermError, ValueError):
    pass


class RootViolation(HaarPermError, ValueError):
    pass


class DepthTooLarge(HaarPermError):
    """An enumeration would exceed its configured budget."""

    def __init__(self, message: str, budget: int | None = None):
        super().__init__(message)
        self.budget = budget


class DepthMismatch(HaarPermError, ValueError):
    pass


class NormalizationMismatch(HaarPermError, ValueError):
    pass


class ZeroSeries(HaarPermError, ValueError):
    pass


class NonContraction(HaarPermError, ValueError):
    """K too small for the decomposition to shrink at every step."""


class NotLevelPreserving(HaarPermError, ValueError):
    pass
