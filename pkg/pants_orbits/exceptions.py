"""Errors raised by the pants_orbits numerics and the orbit finder."""


class PantsError(Exception):
    """Base class for every error this project raises on purpose."""


class ConfigurationError(PantsError):
    pass


class DegenerateConfigurationError(PantsError):
    """A pair distance fell under the collision guard."""


class NotCenteredError(PantsError):
    pass


class CuspGuardError(PantsError):
    """Metric data requested too close to a binary collision point; use the cusp chart."""


class NotInCuspError(PantsError):
    pass


class NotHorizontalError(PantsError):
    pass


class AmbiguousCrossingError(PantsError):
    """An equator crossing was located too close to a collision point to label."""


class InvalidSequenceError(PantsError):
    pass


class ResolutionExceededError(PantsError):
    """No shooting bracket was found at the requested grid resolution."""


class EpsilonTooLargeError(PantsError):
    pass


class LibraryError(PantsError):
    pass


class FileFormatError(PantsError):
    """An input file is missing columns or values, or cannot be parsed."""
