"""Error kinds raised by orbit_forge.

All of them are ValueErrors so callers that only guard against bad input keep working.
"""


class OrbitForgeError(ValueError):
    """Base class for every error raised on purpose by the library."""
    kind = "error"

    def __str__(self):
        message = super().__str__()
        return f"{self.kind}: {message}" if message else self.kind


class DimensionError(OrbitForgeError):
    kind = "dimension error"


class StateParseError(OrbitForgeError):
    kind = "parse error"


class UnsupportedSizeError(OrbitForgeError):
    kind = "unsupported size"


class CatalogError(OrbitForgeError):
    kind = "catalog error"


class ParameterError(OrbitForgeError):
    kind = "parameter error"


class NumericalError(OrbitForgeError):
    kind = "numerical error"
