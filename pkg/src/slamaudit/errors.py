"""Exception types shared across the toolkit."""


class SlamAuditError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(SlamAuditError):
    """Malformed SLAM or label-key input. Carries a line number when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DataError(SlamAuditError):
    """Structurally invalid dataset (duplicate ids, missing labels, ...)."""


class TrainingError(SlamAuditError):
    """Model training could not proceed or violated a training invariant."""


class MetricError(SlamAuditError):
    """A metric is undefined for the given predictions (e.g. one class only)."""


class AuditError(SlamAuditError):
    """A fairness audit cannot be carried out on the given groups."""
