"""Exception hierarchy shared by the library and the command-line tool."""


class CyberSwitchError(Exception):
    """Base class for all package errors."""


class ConfigError(CyberSwitchError, ValueError):
    """A parameter is out of range or a cross-field check failed."""


class EdgeListError(CyberSwitchError, ValueError):
    def __init__(self, message, line_no=None):
        self.line_no = line_no
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)


class EmptyGraphError(CyberSwitchError, ValueError):
    pass


class InfeasibleError(CyberSwitchError, ArithmeticError):
    """A numerical feasibility condition (spectral or M-matrix) does not hold.

    ``check`` names the failed test and ``margin`` carries its signed slack,
    so callers can report which knob to turn.
    """

    def __init__(self, message, check=None, margin=None):
        self.check = check
        self.margin = margin
        super().__init__(message)
