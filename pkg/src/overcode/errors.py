"""Exception types raised across the package."""


class OvercodeError(ValueError):
    """Base class for all domain errors."""


class SizeTooLarge(OvercodeError):
    pass


class LengthMismatch(OvercodeError):
    pass


class NotSquare(OvercodeError):
    pass


class InvalidMask(OvercodeError):
    pass


class CapacityExceeded(OvercodeError):
    pass


class OddExponent(OvercodeError):
    pass


class InvalidNode(OvercodeError):
    pass


class NoOrthogonalCapacity(OvercodeError):
    pass


class OverloadCapacityExhausted(OvercodeError):
    pass


class NotAllocated(OvercodeError):
    pass


class OddBitCount(OvercodeError):
    pass


class MalformedLength(OvercodeError):
    pass


class EmptyCode(OvercodeError):
    pass


class EmptyList(OvercodeError):
    pass


class ProbabilityOverflow(OvercodeError):
    pass


class ConfigError(OvercodeError):
    """Invalid scenario or run configuration."""
