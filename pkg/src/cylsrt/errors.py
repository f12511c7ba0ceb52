"""Exception types shared across the package."""


class CylsrtError(Exception):
    """Base class for all package errors."""


class ValidationError(CylsrtError):
    """Invalid configuration, geometry, or argument values."""


class DimensionError(ValidationError):
    """Shape or grid mismatch between an operator and its operand."""


class CodecError(CylsrtError):
    """Malformed, truncated, or corrupted cache/array file."""


class NumericalError(CylsrtError):
    """Non-finite values or divergence detected during iteration."""
