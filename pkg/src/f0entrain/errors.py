"""Exception types shared across the toolkit.

The CLI maps DataError subclasses to exit code 1 and OS-level errors
(missing files, unwritable directories) to exit code 2.
"""


class DataError(Exception):
    """Base class for errors caused by corpus content."""


class ParseError(DataError):
    """A file could not be parsed in its declared format."""


class ValidationError(DataError):
    """Parsed data violates a corpus invariant (names the offending record)."""


class ComputeError(DataError):
    """An operation's precondition on the data does not hold (degenerate input)."""
