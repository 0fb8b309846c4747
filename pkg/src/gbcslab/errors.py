"""Exception types shared across the package."""


class GbcsError(Exception):
    """Base class for all errors raised by this package."""


class GraphParseError(GbcsError):
    """Malformed graph file. Carries the location of the offending token."""

    def __init__(self, message, line=None, column=None):
        loc = ""
        if line is not None:
            loc = f" (line {line}" + (f", column {column}" if column is not None else "") + ")"
        super().__init__(message + loc)
        self.line = line
        self.column = column


class NumericError(GbcsError):
    """A numerical computation failed (overflow, NaN, divergence)."""


class SingularMatrixError(NumericError):
    """Linear solve rejected: matrix singular or condition estimate too large."""


class FiniteEscapeError(NumericError):
    """A differential equation solution blew up before the end of the horizon."""


class NoEquilibriumError(NumericError):
    """The open-loop equilibrium boundary-value problem has no (unique) solution."""


class ConsistencyError(GbcsError):
    """Inputs that must describe the same system disagree."""


class InvariantError(GbcsError):
    """An internal cross-check failed; indicates a bug, not bad input."""
