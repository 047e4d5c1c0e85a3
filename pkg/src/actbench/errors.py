from __future__ import annotations

from pathlib import Path


class ActbenchError(Exception):
    """Base class for every error raised by actbench."""

    pass


class DomainError(ActbenchError):
    """Raised when a value lies outside its domain (label index, combined index, shape)."""

    pass


class ConfigurationError(ActbenchError):
    """Raised when a configuration, split or hyper-parameter is invalid."""

    pass


class DataFormatError(ActbenchError):
    """Raised when an input file is malformed.

    Attributes:
        path: File that failed to parse (if known)
        line: 1-based line number of the offending line (if known)
    """

    def __init__(self, message: str, path: Path | str | None = None, line: int | None = None):
        self.path = Path(path) if path is not None else None
        self.line = line
        where = ""
        if self.path is not None:
            where = f"{self.path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        elif line is not None:
            where = f"line {line}: "
        super().__init__(f"{where}{message}")


class OptimizationError(ActbenchError):
    """Raised when the quasi-Newton line search cannot find any finite step."""

    pass


class TrainingError(ActbenchError):
    """Raised when recurrent training diverges.

    Attributes:
        step: Time step (0-based) where the first non-finite value appeared, if known
    """

    def __init__(self, message: str, step: int | None = None):
        self.step = step
        super().__init__(message if step is None else f"{message} (time step {step})")


class SelectionError(ActbenchError):
    """Raised when every grid point failed to train."""

    pass


__all__ = [
    "ActbenchError",
    "ConfigurationError",
    "DataFormatError",
    "DomainError",
    "OptimizationError",
    "SelectionError",
    "TrainingError",
]
