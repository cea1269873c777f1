"""Exception types shared across the package.

The CLI maps these onto its exit-code contract:
ParseError -> 2, DomainError -> 1, BudgetError -> 3.
"""


class MaltkitError(Exception):
    pass


class ParseError(MaltkitError):
    """Malformed input text (system files, identity queries, bad flags)."""

    def __init__(self, message, line=None, column=None):
        if line is not None:
            loc = f"line {line}" + (f", column {column}" if column is not None else "")
            message = f"{loc}: {message}"
        super().__init__(message)
        self.line = line
        self.column = column


class DomainError(MaltkitError):
    """Mathematically invalid request (unsatisfiable system, assumption
    failure, inapplicable criterion)."""


class BudgetError(MaltkitError):
    """Request exceeds a configured resource budget."""
