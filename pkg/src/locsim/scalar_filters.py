"""Recursive scalar filters: the von Mises filter and a 1-D Kalman filter."""

from __future__ import annotations

import math
from dataclasses import dataclass

from locsim.circstats import VonMises, kappa_of_sum, multiply
from locsim.errors import DomainError


@dataclass(frozen=True)
class KfState:
    """Scalar Gaussian belief N(mean, var)."""

    mean: float
    var: float

    def __post_init__(self):
        if not (math.isfinite(self.mean) and math.isfinite(self.var)) or self.var <= 0.0:
            raise DomainError(f"invalid Kalman state mean={self.mean!r} var={self.var!r}")


def vmf_time(state: VonMises, u: float, kappa_w: float) -> VonMises:
    """Predict through theta' = theta + u + w with w ~ vM(0, kappa_w).

    ``kappa_w = inf`` is the noise-free limit and keeps the concentration.
    """
    if not kappa_w > 0.0:
        raise DomainError(f"process concentration must be > 0, got {kappa_w!r}")
    return VonMises(state.mu + u, kappa_of_sum(state.kappa, kappa_w))


def vmf_obsv(state: VonMises, o: float, kappa_nu: float) -> VonMises:
    """Fuse the observation o = theta + nu with nu ~ vM(0, kappa_nu)."""
    if not kappa_nu > 0.0:
        raise DomainError(f"observation concentration must be > 0, got {kappa_nu!r}")
    return multiply(state, VonMises(o, kappa_nu))


def kf_time(state: KfState, u: float, var_w: float) -> KfState:
    if var_w < 0.0:
        raise DomainError(f"process variance must be >= 0, got {var_w!r}")
    return KfState(state.mean + u, state.var + var_w)


def kf_obsv(state: KfState, o: float, var_r: float) -> KfState:
    """Scalar Kalman correction with gain var / (var_r + var)."""
    if not var_r > 0.0:
        raise DomainError(f"observation variance must be > 0, got {var_r!r}")
    gain = state.var / (var_r + state.var)
    var = 1.0 / (1.0 / state.var + 1.0 / var_r)
    return KfState(state.mean + gain * (o - state.mean), var)
