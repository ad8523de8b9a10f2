"""Exception types raised across absim."""


class AbsimError(Exception):
    """Base class for all absim errors."""


class ZeroVector(AbsimError, ValueError):
    pass


class DimMismatch(AbsimError, ValueError):
    pass


class NonUnitary(AbsimError, ValueError):
    pass


class NonHermitian(AbsimError, ValueError):
    pass


class OrthogonalSelection(AbsimError, ValueError):
    """Pre- and postselected states have (numerically) zero overlap."""


class OutOfRegime(AbsimError, ValueError):
    pass


class NonPositiveDelta(AbsimError, ValueError):
    pass


class StepsOutOfRange(AbsimError, ValueError):
    pass


class UnknownCut(AbsimError, KeyError):
    pass


class OrderViolation(AbsimError, ValueError):
    pass


class UnknownArm(AbsimError, KeyError):
    pass


class ConfigInvalid(AbsimError, ValueError):
    """A config field holds an invalid value; ``field`` names it."""

    def __init__(self, field, message=""):
        self.field = field
        self.message = message
        super().__init__(f"{field}: {message}" if message else field)


class ParseError(AbsimError, ValueError):
    """Malformed config text at ``line``/``column`` (both 1-based)."""

    def __init__(self, line, column, message):
        self.line = line
        self.column = column
        self.message = message
        super().__init__(f"line {line}, column {column}: {message}")


class ZeroPostselection(AbsimError, RuntimeError):
    """No trial passed the postselection."""
