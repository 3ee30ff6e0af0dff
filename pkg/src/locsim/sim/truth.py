"""Ground-truth unicycle and landmark sensor."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from locsim.circstats import VonMises, sample, wrap
from locsim.errors import GeometryError
from locsim.model import Landmark, NoiseParams, OdometryInput

#: Noise sources, each with its own stream so algorithms share realizations.
SOURCES = ("heading", "speed", "bearing", "range")

MIN_SENSED_RANGE = 1e-6


@dataclass(frozen=True)
class Pose2:
    theta: float
    x: float
    y: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.theta, self.x, self.y)):
            raise ValueError(f"non-finite pose {self}")
        object.__setattr__(self, "theta", wrap(self.theta))


@dataclass(frozen=True)
class NoiseStreams:
    """Independent generators for each noise source of one trial."""

    heading: np.random.Generator
    speed: np.random.Generator
    bearing: np.random.Generator
    range: np.random.Generator

    @classmethod
    def for_trial(cls, seed: int, trial: int) -> "NoiseStreams":
        """Counter-based Philox streams keyed by (seed, trial, source)."""
        gens = [
            np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(trial, i))))
            for i in range(len(SOURCES))
        ]
        return cls(*gens)

    @classmethod
    def single(cls, rng: np.random.Generator) -> "NoiseStreams":
        return cls(rng, rng, rng, rng)


def truth_step(
    p: Pose2, u: OdometryInput, n: NoiseParams, rng: NoiseStreams, heading_model: str = "vonmises"
) -> Pose2:
    """Euler step of the noisy unicycle.

    The heading noise per step is drawn from vM(0, 1/(sigma_omega2 dt^2))
    by default, or from N(0, sigma_omega2 dt^2) with
    ``heading_model="gaussian"``. Zero-variance channels draw nothing.
    """
    kappa_w = n.heading_kappa_w(u.dt)
    if math.isinf(kappa_w):
        w = 0.0
    elif heading_model == "gaussian":
        w = float(rng.heading.normal(0.0, math.sqrt(n.sigma_omega2) * u.dt))
    else:
        w = sample(VonMises(0.0, kappa_w), rng.heading)
    speed = u.v + (float(rng.speed.normal(0.0, math.sqrt(n.sigma_v2))) if n.sigma_v2 > 0.0 else 0.0)
    return Pose2(
        p.theta + u.omega * u.dt + w,
        p.x + speed * math.cos(p.theta) * u.dt,
        p.y + speed * math.sin(p.theta) * u.dt,
    )


def sense(p: Pose2, lm: Landmark, n: NoiseParams, rng: NoiseStreams) -> tuple[float, float]:
    """Noisy relative bearing and range of the landmark.

    Raises:
        GeometryError: if the pose coincides with the landmark.
    """
    dx, dy = lm.x - p.x, lm.y - p.y
    dist = math.hypot(dx, dy)
    if dist < 1e-12:
        raise GeometryError("pose coincides with the landmark")
    nu_b = 0.0 if math.isinf(n.kappa_b) else sample(VonMises(0.0, n.kappa_b), rng.bearing)
    nu_r = float(rng.range.normal(0.0, math.sqrt(n.sigma_r2))) if n.sigma_r2 > 0.0 else 0.0
    return wrap(math.atan2(dy, dx) - p.theta + nu_b), max(dist + nu_r, MIN_SENSED_RANGE)
