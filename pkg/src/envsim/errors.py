"""Exception hierarchy shared across the package."""


class EnvsimError(Exception):
    """Base class for all package-specific errors."""


class DimensionError(EnvsimError, ValueError):
    """Operand shapes are inconsistent with the requested operation."""


class NumericError(EnvsimError, ArithmeticError):
    """A computation produced or received non-finite values."""


class DatasetFormatError(EnvsimError, ValueError):
    """A dataset file is corrupt, truncated, or has the wrong version."""


class CheckpointError(EnvsimError, ValueError):
    """A checkpoint file is corrupt, mismatched, or has the wrong version."""


class SessionError(EnvsimError, RuntimeError):
    """An interactive play session received an invalid message."""
