"""Exception hierarchy shared by all submodules."""


class SBError(Exception):
    """Base class for every error raised by this package."""


class InputError(SBError, ValueError):
    """Invalid argument supplied to a public operation."""


class MismatchedLengths(InputError):
    pass


class NonPositiveLength(InputError):
    pass


class NonFiniteInput(InputError):
    pass


class OutOfDomain(InputError):
    pass


class HorizonMismatch(InputError):
    pass


class InvalidHorizon(InputError):
    pass


class ZeroCount(InputError):
    pass


class InvalidRate(InputError):
    pass


class InvalidThreshold(InputError):
    pass


class InvalidDt(InputError):
    pass


class InvalidT(InputError):
    pass


class InvalidModel(InputError):
    pass


class HeavyTail(InputError):
    """The requested moment does not exist for the model."""


class UnsupportedArgument(InputError):
    pass


class UnsortedSlopes(InputError):
    pass


class BadCutPoints(InputError):
    pass


class TieDetected(InputError):
    """Two subsets of the increments share a mean (within tolerance)."""


class NotInvertible(InputError):
    pass


class TooLarge(InputError):
    """Enumeration oracle refused an input that would explode combinatorially."""


class SlopeAboveDrift(InputError):
    pass


class TooFewSamples(InputError):
    pass


class ZeroMean(InputError):
    pass


class DegenerateMarginal(InputError):
    pass


class UnknownIdentity(InputError):
    pass


class QuadratureFailure(SBError, ArithmeticError):
    pass


class UnsupportedModel(SBError):
    pass


class UnknownTail(SBError):
    """The model cannot certify convergence or divergence of a tail integral."""
