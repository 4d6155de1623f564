"""Exception hierarchy.

``ConfigError`` covers bad user input (CLI exit code 1); everything derived
from ``NumericalError`` is a numerical failure (CLI exit code 2).
"""


class GravcatError(Exception):
    pass


class ConfigError(GravcatError, ValueError):
    """Invalid parameters or configuration; ``field`` names the culprit."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class NumericalError(GravcatError, ArithmeticError):
    pass


class NonConvergence(NumericalError):
    pass


class Overflow(NumericalError, OverflowError):
    pass


class DegenerateDraw(NumericalError):
    pass


class NotAState(NumericalError):
    pass


class NegativeCoupling(ConfigError):
    pass
