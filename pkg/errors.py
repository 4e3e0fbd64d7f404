"""Exception hierarchy for the conversation quality pipeline."""

from typing import List, Optional


class ConvQError(Exception):
    """Base class for all pipeline errors."""


class ConfigError(ConvQError):
    """Invalid or missing configuration value."""

    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f"{key}: {message}")


class ParseError(ConvQError, ValueError):
    """Malformed row in an input file."""

    def __init__(self, path: str, line: int, message: str):
        self.path = path
        self.line = line
        super().__init__(f"{path}, line {line}: {message}")


class SchemaError(ConvQError, ValueError):
    """Input file does not match the expected columns or item ids."""


class DomainError(ConvQError, ValueError):
    """Value outside its allowed domain (rating 6, speaking status 2, ...)."""


class ValidationError(ConvQError, ValueError):
    """Structures are individually valid but inconsistent with each other."""

    def __init__(self, message: str, offending: Optional[List] = None):
        self.offending = list(offending or [])
        super().__init__(message)


class DegenerateSignalError(ConvQError, ValueError):
    """Signal with zero variance where a spread is required."""

    def __init__(self, name: str, message: str = 'signal has zero variance'):
        self.name = name
        super().__init__(f"{name}: {message}")


class UndefinedStatisticError(ConvQError, ValueError):
    """Statistic is mathematically undefined for the given input."""


class InsufficientDataError(ConvQError, ValueError):
    """Input too short for the requested windows, lags or model order."""


class RankDeficiencyError(ConvQError, ValueError):
    """Regression design matrix is singular."""


class ConvergenceError(ConvQError, RuntimeError):
    """Iterative solver stopped before reaching its tolerance."""

    def __init__(self, message: str, trace: Optional[List[float]] = None):
        self.trace = list(trace or [])
        super().__init__(message)


class StratificationError(ConvQError, ValueError):
    """A cross-validation fold lacks one of the classes."""


class StageError(ConvQError):
    """A pipeline stage failed."""

    def __init__(self, stage: str, cause: BaseException):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage '{stage}' failed: {cause}")

    @property
    def is_user_error(self) -> bool:
        """Bad configuration or input data, as opposed to a failure inside a computation."""
        return isinstance(self.cause, USER_ERRORS)


USER_ERRORS = (ConfigError, ParseError, SchemaError, DomainError, ValidationError, FileNotFoundError)
