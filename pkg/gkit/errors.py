""" Exception hierarchy shared by every garland module.

Each class carries the process exit status the command line reports for it.
"""


class GarlandError(Exception):
    exit_code = 3


class ConfigurationError(GarlandError):
    """ Invalid settings, mismatched degree bounds, tolerances below floor. """
    exit_code = 1


class SchemaError(ConfigurationError):
    """ An input document does not match its schema. """

    def __init__(self, message: str, pointer: str = '') -> None:
        self.pointer = pointer or '/'
        super().__init__(f'{message} (at {self.pointer})')


class DomainError(GarlandError):
    """ Input is outside the mathematical domain of the toolkit. """
    exit_code = 2


class SolverError(GarlandError):
    """ A numerical solver failed where a solution is known to exist. """
    exit_code = 3

    def __init__(self, message: str, residuals: list[float] | None = None) -> None:
        self.residuals = list(residuals or [])
        super().__init__(message)
