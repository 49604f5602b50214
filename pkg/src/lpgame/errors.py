"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of a model function."""


class GeometryError(ValueError):
    """Station layout or user position makes localization ill-posed."""


class ConfigError(ValueError):
    """Invalid experiment configuration.

    ``field`` carries the dotted key path of the offending entry when known.
    """

    def __init__(self, message, field=None):
        self.field = field
        super().__init__(f"{field}: {message}" if field else message)


class ShapeError(DomainError):
    """Per-type inputs do not line up with the type distribution."""
