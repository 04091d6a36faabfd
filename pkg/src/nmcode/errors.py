"""Exception types shared across the package."""


class NmcodeError(Exception):
    pass


class DimensionMismatch(NmcodeError, ValueError):
    pass


class NotFullRank(NmcodeError, ValueError):
    pass


class RegimeTooLarge(NmcodeError):
    """Raised when an exhaustive computation would exceed its documented budget."""


class TooManyConstraints(NmcodeError, ValueError):
    pass


class ThresholdViolation(NmcodeError, ValueError):
    pass


class StreamExhausted(NmcodeError):
    pass


class NotFound(NmcodeError):
    pass


class InfeasibleParams(NmcodeError, ValueError):
    def __init__(self, inequality: str, detail: str = ""):
        self.inequality = inequality
        super().__init__(f"violated: {inequality}" + (f" ({detail})" if detail else ""))


class SelectorViolation(NmcodeError, ValueError):
    pass


class LengthMismatch(NmcodeError, ValueError):
    pass


class NonIntegralLog(NmcodeError, ValueError):
    pass


class SpaceMismatch(NmcodeError, ValueError):
    pass


class FormatError(NmcodeError, ValueError):
    """Malformed input file; the message names the offending location."""
