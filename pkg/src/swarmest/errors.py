"""Exception types shared across the package."""


class SwarmEstError(Exception):
    """Base class for package errors."""


class DomainError(SwarmEstError, ValueError):
    """An argument lies outside the domain of an operation."""


class ConfigError(SwarmEstError, ValueError):
    """Invalid experiment or component configuration.

    ``field`` names the offending configuration key when known.
    """

    def __init__(self, message: str, field: str | None = None):
        self.field = field
        super().__init__(f"{field}: {message}" if field else message)


class UnsupportedMappingError(SwarmEstError, TypeError):
    """The field kind has no closed-form position-to-contour mapping."""
