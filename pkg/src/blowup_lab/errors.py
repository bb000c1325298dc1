"""Exception hierarchy shared by the library and the command line."""


class BlowupLabError(Exception):
    """Base class for all errors raised by blowup_lab."""


class ConfigError(BlowupLabError, ValueError):
    """Invalid parameters or inputs (maps to CLI exit status 2)."""


class NumericalError(BlowupLabError, RuntimeError):
    """A computation produced non-finite values or could not proceed."""


class IntegrationError(NumericalError):
    """ODE integration failed.

    Attributes
    ----------
    last_x : float
        Last abscissa at which the solution was still valid.
    """

    def __init__(self, message, last_x=None):
        super().__init__(message)
        self.last_x = last_x


class BlowupGuardError(BlowupLabError, ValueError):
    """Evaluation requested too close to the blowup time T/C."""
