"""Exception types raised by the library."""


class LocalMatchError(Exception):
    """Base class for all library errors."""


class ZeroFirstMoment(LocalMatchError):
    """A size-biased distribution was requested for a measure with zero first moment."""


class ZeroMass(LocalMatchError):
    """A kernel was requested for a measure with no mass on positive degrees."""


class AtomMissing(LocalMatchError):
    """An atom removal was requested at a degree holding no atom."""


class NegativeDegree(LocalMatchError):
    """An atom shift would move mass below degree zero."""


class SupportExceeded(LocalMatchError):
    """A measure does not fit inside the requested support bound."""


class OddSum(LocalMatchError):
    """A degree vector with odd total was passed where an even total is required."""


class NoPositiveMass(LocalMatchError):
    """A degree model concentrated on zero was rejected."""


class TailTooHeavy(LocalMatchError):
    """No admissible support bound keeps the truncated tail below the tolerance."""


class TooLarge(LocalMatchError):
    """Exhaustive enumeration was requested for a graph beyond the supported size."""


class EmptyChoiceSet(LocalMatchError):
    """A choice function was called on an empty vector."""


class UnsupportedKernel(LocalMatchError):
    """No analytic kernel pair is available for this criterion."""


class MeshInvalid(LocalMatchError):
    """The requested integration mesh is outside the accepted range."""


class ConfigError(LocalMatchError):
    """A CLI configuration value could not be parsed."""
