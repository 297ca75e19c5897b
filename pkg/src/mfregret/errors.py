class MFRegretError(Exception):
    """Base class for package errors."""


class InvalidInputError(MFRegretError, ValueError):
    pass


class ConfigError(InvalidInputError):
    """Game configuration failed to parse or validate.

    ``field`` names the offending key path when known; ``line`` is set for
    JSON syntax errors.
    """

    def __init__(self, message, field=None, line=None):
        self.field = field
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field '{field}'")
        prefix = f"[{', '.join(where)}] " if where else ""
        super().__init__(prefix + message)


class CapacityError(MFRegretError):
    """A dense enumeration would exceed its size guard."""


class InternalConsistencyError(MFRegretError, ArithmeticError):
    """A computed quantity violates a property that must hold by construction."""
