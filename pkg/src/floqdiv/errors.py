"""Exception hierarchy shared by the library and the command line."""


class FloqdivError(Exception):
    """Base class for all errors raised by floqdiv."""


class DimensionError(FloqdivError, ValueError):
    """Operands belong to Fock spaces of different dimension."""


class TruncationError(FloqdivError, ValueError):
    """A state does not fit in the truncated Fock space."""


class ModeIndexOutOfRange(FloqdivError, IndexError):
    pass


class StepCountTooSmall(FloqdivError, ValueError):
    pass


class NumericalGateError(FloqdivError):
    """A numerical accuracy or consistency gate failed (CLI exit code 3)."""


class NonConvergence(NumericalGateError):
    """Richardson step doubling disagrees beyond tolerance."""


class EigensolveFailure(NumericalGateError):
    pass


class ParseError(FloqdivError):
    """Configuration file is not valid structured text."""


class ValidationError(FloqdivError, ValueError):
    """Configuration value violates a constraint.

    ``field`` holds the dotted path of the offending key, e.g. ``"bath.h"``.
    """

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")
