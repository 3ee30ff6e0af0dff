"""Localization with a von Mises heading and Gaussian position axes.

Heading runs the von Mises filter, each position axis a scalar Kalman
filter. Heading-position correlations are not tracked.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from locsim.circstats import VonMises, a_func, kappa_of_sum, vm_from_conditioned_gaussian
from locsim.errors import DomainError, GeometryError
from locsim.model import Landmark, NoiseParams, OdometryInput, resultant
from locsim.scalar_filters import KfState, kf_obsv, kf_time, vmf_obsv, vmf_time

__all__ = [
    "Landmark",
    "MixtureBelief",
    "NoiseParams",
    "OdometryInput",
    "equivalent_orientation",
    "obsv_bearing_distance",
    "obsv_direct",
    "pd_domination",
    "reconstruct_heading",
    "time_update",
]

#: Agent-to-landmark distances below this make the bearing undefined.
MIN_RANGE = 1e-12


@dataclass(frozen=True)
class MixtureBelief:
    heading: VonMises
    x: KfState
    y: KfState

    @classmethod
    def at(cls, theta: float, x: float, y: float, kappa: float, var: float) -> "MixtureBelief":
        return cls(VonMises(theta, kappa), KfState(x, var), KfState(y, var))


def position_increment_moments(v: float, sigma_v2: float, heading: VonMises) -> tuple[float, float, float]:
    """Mean of (v + n_v) cos/sin of a vM heading, and the variance bound.

    Returns ``(mean_cos, mean_sin, var_bound)`` per unit time with
    ``var_bound = sigma_v2 + v**2``, an upper bound on both variances.
    """
    a = a_func(heading.kappa)
    return v * a * math.cos(heading.mu), v * a * math.sin(heading.mu), sigma_v2 + v * v


def time_update(b: MixtureBelief, u: OdometryInput, n: NoiseParams) -> MixtureBelief:
    heading = vmf_time(b.heading, u.omega * u.dt, n.heading_kappa_w(u.dt))
    mean_c, mean_s, var_bound = position_increment_moments(u.v, n.sigma_v2, b.heading)
    var_w = var_bound * u.dt * u.dt
    return MixtureBelief(
        heading,
        kf_time(b.x, mean_c * u.dt, var_w),
        kf_time(b.y, mean_s * u.dt, var_w),
    )


def obsv_direct(b: MixtureBelief, o_theta: float, o_x: float, o_y: float, n: NoiseParams) -> MixtureBelief:
    """Update with direct, additive-noise measurements of all three states."""
    return MixtureBelief(
        vmf_obsv(b.heading, o_theta, n.kappa_nu_theta),
        kf_obsv(b.x, o_x, n.sigma2_ox),
        kf_obsv(b.y, o_y, n.sigma2_oy),
    )


def reconstruct_heading(
    x_mean: float,
    y_mean: float,
    pos_var: float,
    lm: Landmark,
    s_b: float,
    s_r: float,
    n: NoiseParams,
    literal: bool = False,
) -> VonMises:
    """Heading belief reconstructed from a bearing/range pair.

    The landmark direction is vM by Gaussian conditioning with the
    nominal covariance ``2 * pos_var * I``; its concentration is
    combined with the bearing noise by the convolution rule. With
    ``literal=True`` the concentration is the bare product
    A(k1) * A(kappa_b) instead.
    """
    if not s_r > 0.0:
        raise DomainError(f"measured range must be > 0, got {s_r!r}")
    dx, dy = lm.x - x_mean, lm.y - y_mean
    r_bar = math.hypot(dx, dy)
    if r_bar < MIN_RANGE:
        raise GeometryError("position estimate coincides with the landmark")
    direction = vm_from_conditioned_gaussian(math.atan2(dy, dx), r_bar, 2.0 * pos_var, s_r)
    if literal:
        kappa = a_func(direction.kappa) * resultant(n.kappa_b)
    else:
        kappa = kappa_of_sum(direction.kappa, n.kappa_b)
    return VonMises(direction.mu - s_b, kappa)


def equivalent_orientation(
    b: MixtureBelief, lm: Landmark, s_b: float, s_r: float, n: NoiseParams, literal: bool = False
) -> VonMises:
    """:func:`reconstruct_heading` from the belief's position estimate."""
    return reconstruct_heading(b.x.mean, b.y.mean, max(b.x.var, b.y.var), lm, s_b, s_r, n, literal)


def equivalent_position(
    heading: VonMises, lm: Landmark, s_b: float, s_r: float, n: NoiseParams
) -> tuple[float, float, float]:
    """Cartesian position implied by a bearing/range pair and a vM heading.

    Returns ``(o_x, o_y, var)``; ``var = sigma_r2 + s_r**2`` bounds the
    variance of either coordinate.
    """
    scale = s_r * a_func(heading.kappa) * resultant(n.kappa_b)
    angle = heading.mu + s_b
    return lm.x - scale * math.cos(angle), lm.y - scale * math.sin(angle), n.sigma_r2 + s_r * s_r


def obsv_bearing_distance(
    b: MixtureBelief,
    lm: Landmark,
    s_b: float,
    s_r: float,
    n: NoiseParams,
    literal: bool = False,
) -> MixtureBelief:
    """Update with a landmark bearing ``s_b`` and range ``s_r``.

    The position axes are corrected with the equivalent Cartesian
    observation built from the prior heading. The heading itself is
    replaced, not fused, by the equivalent orientation, because that
    measurement depends on the current estimate.
    """
    o_x, o_y, var = equivalent_position(b.heading, lm, s_b, s_r, n)
    heading = equivalent_orientation(b, lm, s_b, s_r, n, literal)
    return MixtureBelief(heading, kf_obsv(b.x, o_x, var), kf_obsv(b.y, o_y, var))


def pd_domination(P, c: float = 0.5, split: int = 1) -> np.ndarray:
    """Block-diagonal bound diag(P11 / c, P22 / (1 - c)) dominating ``P``.

    ``split`` is the size of the leading block. The difference between
    the result and ``P`` is positive definite for any 0 < c < 1.

    Raises:
        DomainError: if ``P`` is not symmetric positive definite or ``c``
            is outside (0, 1).
    """
    P = np.asarray(P, dtype=float)
    if P.ndim != 2 or P.shape[0] != P.shape[1] or not 0 < split < P.shape[0]:
        raise DomainError(f"expected a square matrix larger than the split, got shape {P.shape}")
    if not 0.0 < c < 1.0:
        raise DomainError(f"c must lie in (0, 1), got {c!r}")
    if not np.allclose(P, P.T, rtol=1e-12, atol=1e-14):
        raise DomainError("matrix is not symmetric")
    try:
        np.linalg.cholesky(P)
    except np.linalg.LinAlgError as exc:
        raise DomainError("matrix is not positive definite") from exc
    out = np.zeros_like(P)
    out[:split, :split] = P[:split, :split] / c
    out[split:, split:] = P[split:, split:] / (1.0 - c)
    return out
