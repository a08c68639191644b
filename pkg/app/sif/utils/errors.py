# sif/utils/errors.py
"""Exception hierarchy shared by the library and the command line.

Every class carries the process exit code the CLI reports for it.
"""


class SIFError(Exception):
    """Base class for all library errors."""

    exit_code = 4


class UsageError(SIFError):
    """Invalid combination of user-supplied parameters."""

    exit_code = 2


class InvalidGridError(SIFError, ValueError):
    """Grid size outside the supported range."""

    exit_code = 2


class GridIndexError(SIFError, IndexError):
    """Latitude or longitude index outside 1..N."""

    exit_code = 2


class InvalidFilterError(SIFError, ValueError):
    """Filter radius or filter samples violate a precondition."""

    exit_code = 2


class GridMismatchError(SIFError, ValueError):
    """Two objects live on different grids."""

    exit_code = 2


class ResourceLimitError(SIFError):
    """A computation would exceed a configured size or memory bound."""

    exit_code = 3


class NoOscillationError(SIFError, ValueError):
    """The signal has fewer than two extrema where at least two are required."""


class DegenerateSignalError(SIFError, ArithmeticError):
    """A norm that must be positive is zero."""


class ContainerError(SIFError):
    """Operator container could not be read."""


class ContainerFormatError(ContainerError):
    """Bad magic bytes or malformed header."""


class ChecksumError(ContainerError):
    """Stored digest does not match the file content."""


class FormatVersionError(ContainerError):
    """Container written by an unsupported format version."""
