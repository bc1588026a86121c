class TsvdError(Exception):
    """Base class for every error raised by the library."""


class ArgumentError(TsvdError, ValueError):
    """Bad dimensions, out-of-range parameters or non-finite input."""


class StructuralError(TsvdError):
    """Blocks of inconsistent width or operands that are not co-partitioned."""


class FormatError(TsvdError):
    """A matrix file with the wrong magic, wrong version or a truncated payload."""


class NumericalError(TsvdError):
    """A computed factor contains NaN or Inf."""
