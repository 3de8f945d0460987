"""Exception types shared across the engine."""


class VecGPError(Exception):
    pass


class InvalidParameterError(VecGPError, ValueError):
    """A parameter or configuration value is outside its allowed range."""


class ParseError(VecGPError, ValueError):
    """Malformed genotype text. ``position`` is the 0-based character offset."""

    def __init__(self, message, position):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class CapacityError(VecGPError, MemoryError):
    """A domain or evaluation would exceed the configured memory budget."""


class TimeLimitExceeded(VecGPError):
    pass
