"""Exception types raised across the package."""


class ImpulseFitError(Exception):
    """Base class for all package errors."""


class DomainError(ImpulseFitError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ConfigError(ImpulseFitError, ValueError):
    """An optimizer or experiment configuration is inconsistent."""


class ParseError(ImpulseFitError, ValueError):
    """A data file could not be parsed.

    Parameters
    ----------
    message : str
        Human readable description.
    line : int, optional
        1-based line number in the offending file.
    """

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class TrialError(ImpulseFitError):
    """A benchmark trial failed; the message names the trial."""
