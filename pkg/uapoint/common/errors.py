"""Exception hierarchy shared by every uapoint module.

Each exception carries the exit code the CLI reports for it, so library code can
raise freely and only ``uapoint.cli.run`` translates failures into process status.
"""

from typing import Optional


class UapointError(Exception):
    """Base class for all uapoint errors."""

    exit_code: int = 1


class ParameterError(UapointError, ValueError):
    """A parameter value is outside its admissible range."""

    exit_code = 1


class FrustumError(ParameterError):
    """A camera would sit inside the unit sphere that holds the object."""


class DataError(UapointError):
    """Input data is missing, malformed or unusable."""

    exit_code = 2


class ParseError(DataError):
    """A text file could not be parsed."""

    def __init__(self, message: str, line: Optional[int] = None) -> None:
        """
        Initialize parse error.

        Args:
            message: Human readable description
            line: 1-based line number of the offending line, if known
        """
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class EmptyInputError(DataError):
    """An input collection that must be non-empty is empty."""


class DatasetError(DataError):
    """A dataset or manifest is inconsistent."""


class DegenerateShiftError(DataError):
    """A domain shift removed (almost) every point of a sample."""


class DegenerateInputError(DataError):
    """An input has no usable magnitude or too few points."""


class ShapeError(DataError):
    """Tensor or matrix dimensions do not agree."""


class PreconditionError(DataError):
    """An operation was called outside its precondition."""


class ConfigurationError(DataError):
    """A required asset (knowledge file, checkpoint) is missing or corrupt."""


class NumericError(UapointError, ArithmeticError):
    """A computation produced or received non-finite values."""

    exit_code = 3


class NonFiniteInputError(NumericError, ValueError):
    """An input tensor contains NaN or infinite entries."""
