"""Exception taxonomy.

Two families matter to callers: ParameterError (bad or unsupported input,
CLI exit code 2) and NumericalContractError (a numerical guarantee could
not be met, CLI exit code 3).  Nothing here ever returns a silently wrong
value; every failure mode has a named class.
"""


class NqdkitError(Exception):
    """Base class for all package errors."""


class ParameterError(NqdkitError, ValueError):
    """Invalid argument value or combination."""


class ParseError(ParameterError):
    """Malformed descriptor string or data file (names the offending line)."""


class FormatError(ParseError):
    """Structurally valid file or object missing required metadata."""


class ZeroWeightError(ParameterError):
    """Conditional process output has zero event weight (e.g. subtraction at alpha=0)."""


class CapabilityError(ParameterError):
    """Requested operation is outside the supported model set."""


class NumericalContractError(NqdkitError, ArithmeticError):
    """A stated numerical tolerance or validity condition failed."""


class TruncationError(NumericalContractError):
    """Fock-space cutoff too small for the requested tail bound."""

    def __init__(self, message, suggested_cutoff=None):
        super().__init__(message)
        self.suggested_cutoff = suggested_cutoff


class ResolutionError(NumericalContractError):
    """Grid too coarse to resolve the integrand it must represent."""


class RangeError(NumericalContractError):
    """Tabulated range does not capture the required mass or value."""


class CoverageError(NumericalContractError):
    """Input distribution extends past the covered amplitude range."""

    def __init__(self, message, tail_mass=None):
        super().__init__(message)
        self.tail_mass = tail_mass
