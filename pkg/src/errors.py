"""
Exception hierarchy for the connected cruise control laboratory.
"""

from typing import Optional


class CruiseControlError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(CruiseControlError, ValueError):
    """An argument lies outside the domain of a physical model."""


class OrderingError(DomainError):
    """Vehicles are not ordered front to back with positive gaps."""

    def __init__(self, message: str, row: Optional[int] = None):
        self.row = row
        if row is not None:
            message = f"{message} (row {row})"
        super().__init__(message)


class QpBuildError(DomainError):
    """Inputs to the QP builder have inconsistent dimensions."""


class ConfigurationError(CruiseControlError):
    """Configuration is missing, unknown or inconsistent."""


class ScenarioParseError(CruiseControlError):
    """A scenario file could not be parsed."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)

