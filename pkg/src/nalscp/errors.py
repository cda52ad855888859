"""Exception types raised across the package."""


class NalError(Exception):
    """Base class for all package errors."""


class DimensionMismatch(NalError, ValueError):
    pass


class DomainError(NalError, ValueError):
    """A scalar map was applied outside its domain.

    Carries the offending ``eigenvalue`` and the index of the cone ``block``.
    """

    def __init__(self, message, eigenvalue=None, block=None):
        super().__init__(message)
        self.eigenvalue = eigenvalue
        self.block = block


class NotInterior(NalError, ValueError):
    """An element expected in the interior of the cone is not."""


class FrameMismatch(NalError, ValueError):
    """Two spectral decompositions do not share a Jordan frame."""


class RankDeficient(NalError, ArithmeticError):
    """A Cholesky factorization failed even after regularization."""


class NonPositiveEigenvalue(NalError, ArithmeticError):
    pass


class MaxInnerExceeded(NalError, RuntimeError):
    """The Newton inner loop hit its safety cap.

    ``records`` holds the iterate log accumulated up to the failure.
    """

    def __init__(self, message, records=()):
        super().__init__(message)
        self.records = list(records)


class ConeNotSupported(NalError, ValueError):
    pass


class ParseError(NalError, ValueError):
    """Malformed problem file; ``line`` and ``column`` are 1-based."""

    def __init__(self, message, line=None, column=None):
        where = ""
        if line is not None:
            where = f"line {line}"
            if column is not None:
                where += f", column {column}"
            where += ": "
        super().__init__(where + message)
        self.line = line
        self.column = column
        self.reason = message


class UnsupportedFeature(NalError, ValueError):
    pass
