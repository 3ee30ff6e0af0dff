"""Exception types raised by the estimation library."""


class LocsimError(Exception):
    """Base class for all library errors."""


class DomainError(LocsimError, ValueError):
    """An argument lies outside the domain of the operation."""


class DegenerateFusionError(LocsimError, ArithmeticError):
    """Two von Mises densities cancel and the fused mean is undefined."""


class GeometryError(LocsimError, ValueError):
    """The agent estimate coincides with the landmark."""


class NoInformationError(LocsimError, ValueError):
    """A readout was requested from a belief carrying no information."""


class NumericalError(LocsimError, ArithmeticError):
    """A linear-algebra step became singular or non-finite."""
