"""Shared scenario types: odometry inputs, noise parameters, landmarks."""

from __future__ import annotations

import math
from dataclasses import dataclass

from locsim.circstats import a_func
from locsim.errors import DomainError


@dataclass(frozen=True)
class OdometryInput:
    """Commanded angular rate ``omega`` (rad/s), speed ``v`` (m/s), step ``dt`` (s)."""

    omega: float
    v: float
    dt: float

    def __post_init__(self):
        if not self.dt > 0.0:
            raise DomainError(f"dt must be > 0, got {self.dt!r}")


@dataclass(frozen=True)
class NoiseParams:
    """Noise model of the unicycle and its sensors.

    Variances are in SI units; concentrations are dimensionless and may
    be ``math.inf`` for a noise-free channel. The defaults reproduce the
    benchmark scenario at dt = 0.02 s (sigma_omega2 * dt**2 = 0.004).
    The direct-measurement parameters have no benchmark value.
    """

    sigma_omega2: float = 10.0
    sigma_v2: float = 1e-4
    kappa_nu_theta: float = 100.0
    sigma2_ox: float = 0.01
    sigma2_oy: float = 0.01
    kappa_b: float = 500.0
    sigma_r2: float = 1e-4

    def __post_init__(self):
        for name in ("sigma_omega2", "sigma_v2", "sigma2_ox", "sigma2_oy", "sigma_r2"):
            value = getattr(self, name)
            if not (value >= 0.0 and math.isfinite(value)):
                raise DomainError(f"{name} must be finite and >= 0, got {value!r}")
        for name in ("kappa_nu_theta", "kappa_b"):
            if not getattr(self, name) >= 0.0:
                raise DomainError(f"{name} must be >= 0, got {getattr(self, name)!r}")

    def heading_kappa_w(self, dt: float) -> float:
        """Concentration of the vM surrogate for the per-step heading noise."""
        var = self.sigma_omega2 * dt * dt
        return math.inf if var == 0.0 else 1.0 / var

    @property
    def a_bearing(self) -> float:
        """A(kappa_b); 1 for a noise-free bearing."""
        return 1.0 if math.isinf(self.kappa_b) else a_func(self.kappa_b)


@dataclass(frozen=True)
class Landmark:
    x: float
    y: float


def resultant(kappa: float) -> float:
    """A(kappa) extended with A(inf) = 1."""
    return 1.0 if math.isinf(kappa) else a_func(kappa)
