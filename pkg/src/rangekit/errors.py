"""Exception hierarchy shared by all modules."""


class RangekitError(Exception):
    """Base class for errors raised by rangekit."""


class DomainError(RangekitError, ValueError):
    """An argument lies outside the domain of the operation."""


class NumericalError(RangekitError, ArithmeticError):
    """A computation produced a result that fails a numerical sanity check."""


class CertificateError(NumericalError):
    """An optimality certificate did not meet its tolerance."""

    def __init__(self, message, gap=None, diagnostics=None):
        super().__init__(message)
        self.gap = gap
        self.diagnostics = diagnostics or {}
