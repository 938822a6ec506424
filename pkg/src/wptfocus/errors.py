"""Exception types raised by the simulator."""


class WptError(Exception):
    """Base class for all simulator errors."""


class GeometryError(WptError):
    pass


class SameSideViolation(GeometryError):
    """Transmitter and receiver are not strictly on the same side of a reflector."""


class DegenerateDirection(GeometryError):
    pass


class SingularPoint(GeometryError):
    """Field point coincides with an antenna or a mirror antenna."""


class ZeroDistance(GeometryError):
    pass


class UnknownComponent(WptError):
    pass


class ZeroChannel(WptError):
    pass


class NonpositiveFrequency(WptError):
    pass


class EmptyGrid(WptError):
    pass


class EmptySamples(WptError):
    pass


class ZeroTrials(WptError):
    pass


class ConfigError(WptError):
    """Invalid scenario file or command-line configuration."""
