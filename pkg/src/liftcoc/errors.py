"""Exception hierarchy for liftcoc."""


class LiftcocError(Exception):
    """Base class for every error raised by the engine."""


class NonTraceClass(LiftcocError):
    """Trace requested on an operator whose identity part has nonzero residue."""


class ArityMismatch(LiftcocError):
    pass


class NotACycle(LiftcocError):
    pass


class DimensionTooLarge(LiftcocError):
    pass


class ConfigError(LiftcocError):
    pass


class ParseError(LiftcocError):
    """Malformed operator text. `position` is the 0-based offending offset."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class IndexOutOfRange(ParseError):
    pass
