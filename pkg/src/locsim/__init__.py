"""Von Mises filtering and circular localization.

Subpackages: :mod:`locsim.circstats` (distribution core),
:mod:`locsim.scalar_filters`, :mod:`locsim.mixture_loc`,
:mod:`locsim.circular_loc`, :mod:`locsim.baselines` and the
:mod:`locsim.sim` Monte Carlo harness.
"""

from locsim.circstats import VonMises, a_func, a_inv, bessel_ratio
from locsim.errors import (
    DegenerateFusionError,
    DomainError,
    GeometryError,
    LocsimError,
    NoInformationError,
    NumericalError,
)

__version__ = "0.1.0"

__all__ = [
    "VonMises",
    "a_func",
    "a_inv",
    "bessel_ratio",
    "DegenerateFusionError",
    "DomainError",
    "GeometryError",
    "LocsimError",
    "NoInformationError",
    "NumericalError",
]
