"""Exception hierarchy.

Errors fall into three families that the CLI maps to exit codes:
``UsageError`` (bad parameters, exit 1), ``InputError`` (unreadable or
malformed input, exit 2) and ``DegenerateError`` (numerically degenerate
input, exit 3).
"""


class HetscanError(Exception):
    """Base class for every error raised by this package."""


class UsageError(HetscanError, ValueError):
    """Invalid parameter or configuration."""


class InputError(HetscanError, ValueError):
    """Input data is malformed, truncated or too small."""


class DegenerateError(HetscanError, ArithmeticError):
    """Input is well-formed but carries no usable variation."""


# grid / io
class BadMagic(InputError):
    pass


class TruncatedData(InputError):
    pass


class RangeError(InputError):
    pass


class TooSmall(InputError):
    pass


class ParseError(InputError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


# dwt
class TooShort(InputError):
    pass


class BadLevels(UsageError):
    pass


class ShapeMismatch(UsageError):
    pass


class DegenerateSignal(DegenerateError):
    pass


# cwt
class BadScale(UsageError):
    pass


class BadOmega(UsageError):
    pass


class ZeroPower(DegenerateError):
    pass


# mfdfa
class ZeroVariance(DegenerateError):
    def __init__(self, message="degenerate: zero variance"):
        super().__init__(message)


class SingularFit(DegenerateError):
    pass


class AllSegmentsDegenerate(DegenerateError):
    pass


class NegativeMomentOnZero(DegenerateError):
    pass


class FitFailure(DegenerateError):
    pass


class TooFewPoints(UsageError):
    pass


# synth
class BadParam(UsageError):
    pass


class EmbeddingFailure(DegenerateError):
    pass


# report
class ConfigMismatch(UsageError):
    pass


class DirectionError(HetscanError):
    """Wraps a module error with the unfolding direction that failed.

    The wrapped error is available as ``cause`` and decides the family.
    """

    def __init__(self, direction, cause):
        super().__init__(f"{direction} unfolding: {cause}")
        self.direction = direction
        self.cause = cause
