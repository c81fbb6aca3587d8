"""Exception hierarchy shared by all modules."""


class TeleconnectError(Exception):
    """Base class for every error raised by this package."""


class ParseError(TeleconnectError):
    """A line of an input file does not follow its grammar."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class StructuralError(TeleconnectError):
    """Rows parsed individually but the table is inconsistent (duplicate or out-of-order years)."""


class AlignmentError(TeleconnectError):
    """Series cannot be aligned on a common, non-empty window."""


class DomainError(TeleconnectError, ValueError):
    """Input is outside the domain of an operation."""


class NumericError(TeleconnectError, ArithmeticError):
    """A computation broke down numerically (rank deficiency, non-finite values)."""


class SearchError(TeleconnectError):
    """Every cell of an order grid search failed."""

    def __init__(self, message, failures=None):
        self.failures = dict(failures or {})
        if self.failures:
            detail = "; ".join(f"{k}: {v}" for k, v in sorted(self.failures.items()))
            message = f"{message} ({detail})"
        super().__init__(message)


class UsageError(TeleconnectError):
    """Bad command-line or API usage (unknown figure id, missing argument)."""
