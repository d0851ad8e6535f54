"""Exception types shared across the package."""


class EvrotorError(Exception):
    """Base class for all library errors."""


class ValidationError(EvrotorError):
    """Input data violates a structural constraint (bounds, shape, range)."""


class ConfigurationError(EvrotorError):
    """A parameter value is outside its legal range or inconsistent."""


class DegenerateInputError(EvrotorError):
    """An operation received input with no usable geometric content."""


class EventFormatError(EvrotorError):
    """An event file could not be parsed."""

    def __init__(self, message: str, *, path=None, line: int | None = None):
        prefix = ""
        if path is not None:
            prefix = f"{path}:"
            if line is not None:
                prefix += f"{line}:"
            prefix += " "
        super().__init__(prefix + message)
        self.path = None if path is None else str(path)
        self.line = line
