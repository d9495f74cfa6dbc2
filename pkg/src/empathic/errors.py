"""Exception hierarchy shared across the package.

Every error raised deliberately by ``empathic`` derives from
:class:`EmpathicError`, so callers can catch one type at the boundary.
"""


class EmpathicError(Exception):
    """Base class for all package errors."""


class ValidationError(EmpathicError, ValueError):
    """A value violates a documented invariant."""


class ParseError(EmpathicError, ValueError):
    """A file could not be parsed.

    ``location`` names the offending line or field when known.
    """

    def __init__(self, message, location=None):
        self.location = location
        if location is not None:
            message = f"{location}: {message}"
        super().__init__(message)


class InsufficientDataError(EmpathicError, ValueError):
    """Input too short (or too sparse) for the requested computation."""


class NoBeatsError(InsufficientDataError):
    """Fewer than two usable interbeat intervals were found."""


class TrainingError(EmpathicError):
    """A model could not be trained on the supplied dataset."""


class ModelFormatError(ParseError):
    """A model file is corrupt or not a model file at all."""


class IncompatibleModelError(EmpathicError):
    """A model file was written by an unsupported format version."""


class ConfigError(EmpathicError, ValueError):
    """Engine or server configuration is invalid."""


class ProtocolError(EmpathicError):
    """A wire message is malformed or illegal in the current session phase."""


class SerializationError(EmpathicError, ValueError):
    """A value cannot be represented in the on-disk format."""
