"""Exception types shared across the package."""


class TitlMarsError(Exception):
    """Base class for all package errors."""


class ValidationError(TitlMarsError):
    """A structural invariant of a model, dataset, or config is violated."""


class ParseError(ValidationError):
    """A text document could not be parsed.

    Carries the 1-based line number when known.
    """

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class CapacityError(TitlMarsError):
    """A configured size cap (vertex count, dimension) was exceeded."""


class CertificateError(TitlMarsError):
    """A certified bound was contradicted (solver or harness defect)."""


class FitError(TitlMarsError):
    """Model fitting cannot proceed on the given data."""


class WakeDomainError(TitlMarsError):
    """Wake evaluation requested inside the rotor disc (r < R)."""
