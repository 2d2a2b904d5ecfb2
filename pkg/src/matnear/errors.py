"""Exception types and warnings shared across the library."""


class MatnearError(Exception):
    """Base class for all library-specific errors."""


class DefectiveTargetError(MatnearError):
    """Target eigenvalue is numerically defective (x*y too small)."""


class ZeroNotSimpleError(MatnearError):
    """Matrix does not have a simple zero eigenvalue."""


class DimensionMismatchError(MatnearError, ValueError):
    """Operands have incompatible shapes."""


class DegreeMismatchError(MatnearError, ValueError):
    """Polynomial coefficient vectors have inconsistent degrees."""


class NotOnBoundaryError(MatnearError):
    """Point is not on the pseudospectrum boundary at the given level."""


class TangentUndefinedError(MatnearError):
    """Outer normal is undefined because u*v is numerically zero."""


class NoImaginaryCrossingError(MatnearError):
    """Vertical search found no level-set crossings."""


class NotStableError(MatnearError):
    """Input matrix violates the stability precondition of the solver."""


class NotDissipativeError(MatnearError):
    """Input matrix has nonnegative numerical abscissa."""


class RhoBlowupError(MatnearError):
    """Structure projection nearly annihilates the rank-1 factor uv*."""


class BreakdownError(MatnearError):
    """Outer iteration broke down (inconsistent bracket)."""


class ZeroGradientError(MatnearError):
    """Gradient vanished where a nonzero gradient is required."""


class ParseError(MatnearError, ValueError):
    """Matrix Market parse failure; carries the 1-based line number."""

    def __init__(self, message, line_no=None):
        self.line_no = line_no
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)


class UnsupportedFieldError(ParseError):
    """Matrix Market field not usable as matrix values (pattern/integer)."""


class NearDefectiveWarning(UserWarning):
    """Target eigenvalue has a small gap to the rest of the spectrum."""
