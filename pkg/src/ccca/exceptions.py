"""Exception types raised by the package."""


class CCCAError(Exception):
    """Base class for all package errors."""


class DegenerateSignalError(CCCAError, ValueError):
    """A channel has zero variance, so ranks and bandwidths are undefined."""


class SingularMatrixError(CCCAError, ArithmeticError):
    """A de-mixing or mixing matrix is (numerically) singular."""


class DataFormatError(CCCAError, ValueError):
    """Malformed input file (CSV signals or coefficient records)."""
