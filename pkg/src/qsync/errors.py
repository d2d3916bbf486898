"""Exception hierarchy shared across the package."""


class QsyncError(Exception):
    """Base class for all package errors."""


class GridMismatchError(QsyncError, ValueError):
    pass


class DomainError(QsyncError, ValueError):
    pass


class SolverError(QsyncError):
    """Raised when time integration cannot continue."""

    def __init__(self, message, *, oscillator=None, time=None):
        super().__init__(message)
        self.oscillator = oscillator
        self.time = time


class VanishingMassError(SolverError):
    pass


class NumericalInstabilityError(SolverError):
    pass


class NoFixedPointError(QsyncError, ValueError):
    pass


class ExcludedInitialConditionError(QsyncError, ValueError):
    pass


class SingularityError(QsyncError, ArithmeticError):
    pass


class ConfigError(QsyncError, ValueError):
    pass


class FormatError(QsyncError, ValueError):
    """Malformed trajectory or checkpoint data."""

    def __init__(self, message, *, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class UnknownScenarioError(QsyncError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else "unknown scenario"
