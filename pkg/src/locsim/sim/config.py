"""Flat ``section.key = value`` scenario files.

Every recognized key is listed in :data:`SCHEMA`; unknown keys are an
error so typos do not silently fall back to defaults. Blank lines and
``#`` comments are ignored.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace
from importlib import resources
from pathlib import Path

from locsim.circular_loc import ModuleBank
from locsim.errors import DomainError
from locsim.model import Landmark, NoiseParams, OdometryInput

ALGORITHMS = ("mixture", "circular", "ekf", "lgekf")
HEADING_MODELS = ("vonmises", "gaussian")


class ConfigError(DomainError):
    """Malformed or inconsistent scenario file."""


def _parse_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_algorithms(text: str) -> tuple[str, ...]:
    names = tuple(part.strip() for part in text.split(",") if part.strip())
    unknown = [name for name in names if name not in ALGORITHMS]
    if unknown:
        raise ValueError(f"unknown algorithms {unknown}; choose from {ALGORITHMS}")
    return names


# file key -> (TrialConfig attribute, parser)
SCHEMA = {
    "sim.dt": ("dt", float),
    "sim.duration": ("duration", float),
    "sim.obs_rate": ("obs_rate", float),
    "sim.trials": ("trials", int),
    "sim.seed": ("seed", int),
    "odometry.omega": ("omega", float),
    "odometry.v": ("v", float),
    "noise.sigma_omega2": ("sigma_omega2", float),
    "noise.sigma_v2": ("sigma_v2", float),
    "noise.kappa_b": ("kappa_b", float),
    "noise.sigma_r2": ("sigma_r2", float),
    "noise.heading_model": ("heading_model", str),
    "landmark.x": ("landmark_x", float),
    "landmark.y": ("landmark_y", float),
    "init.theta": ("init_theta", float),
    "init.x": ("init_x", float),
    "init.y": ("init_y", float),
    "init.kappa": ("init_kappa", float),
    "init.var": ("init_var", float),
    "init.cov_theta": ("init_cov_theta", float),
    "init.cov_x": ("init_cov_x", float),
    "init.cov_y": ("init_cov_y", float),
    "modules.smallest": ("lambda_smallest", float),
    "modules.ratio": ("lambda_ratio", float),
    "modules.count": ("module_count", int),
    "modules.coverage_lo": ("coverage_lo", float),
    "modules.coverage_hi": ("coverage_hi", float),
    "modules.resolution": ("resolution", float),
    "run.algorithms": ("algorithms", _parse_algorithms),
    "run.literal_kappa": ("literal_kappa", _parse_bool),
    "metrics.window_start": ("window_start", float),
    "metrics.window_end": ("window_end", float),
}


@dataclass(frozen=True)
class TrialConfig:
    """One benchmark scenario. Defaults match ``paper_fig2.cfg``."""

    dt: float = 0.02
    duration: float = 30.0
    obs_rate: float = 2.5
    trials: int = 50
    seed: int = 2019
    omega: float = 0.2
    v: float = 0.1
    sigma_omega2: float = 10.0
    sigma_v2: float = 1e-4
    kappa_b: float = 500.0
    sigma_r2: float = 1e-4
    heading_model: str = "vonmises"
    landmark_x: float = 2.0
    landmark_y: float = 3.0
    init_theta: float = 0.0
    init_x: float = 0.0
    init_y: float = 0.0
    init_kappa: float = 100.0
    init_var: float = 0.01
    init_cov_theta: float = 0.01
    init_cov_x: float = 0.01
    init_cov_y: float = 0.01
    lambda_smallest: float = 2.5
    lambda_ratio: float = 1.5
    module_count: int = 4
    coverage_lo: float = -5.0
    coverage_hi: float = 5.0
    resolution: float = 0.005
    algorithms: tuple[str, ...] = ALGORITHMS
    literal_kappa: bool = False
    window_start: float = 10.0
    window_end: float = 30.0

    def __post_init__(self):
        if not self.dt > 0.0:
            raise ConfigError(f"sim.dt must be > 0, got {self.dt}")
        if not self.duration > 0.0:
            raise ConfigError(f"sim.duration must be > 0, got {self.duration}")
        if not 0.0 < self.obs_rate <= 1.0 / self.dt:
            raise ConfigError(f"sim.obs_rate must lie in (0, 1/dt], got {self.obs_rate}")
        every = 1.0 / (self.obs_rate * self.dt)
        if abs(every - round(every)) > 1e-9 * every:
            raise ConfigError(f"1 / (obs_rate * dt) = {every:g} must be an integer number of steps")
        if self.trials < 1:
            raise ConfigError(f"sim.trials must be >= 1, got {self.trials}")
        if self.heading_model not in HEADING_MODELS:
            raise ConfigError(f"noise.heading_model must be one of {HEADING_MODELS}")
        if not self.algorithms:
            raise ConfigError("run.algorithms is empty")
        if not self.coverage_lo <= self.init_x <= self.coverage_hi or not (
            self.coverage_lo <= self.init_y <= self.coverage_hi
        ):
            raise ConfigError("initial position lies outside the module coverage")
        if not self.window_start < self.window_end or self.window_start > self.duration:
            raise ConfigError("metrics window is empty or starts after the run ends")
        for name in ("init_kappa", "init_var", "init_cov_theta", "init_cov_x", "init_cov_y", "resolution"):
            value = getattr(self, name)
            if not (value > 0.0 and math.isfinite(value)):
                raise ConfigError(f"{name} must be positive and finite, got {value}")
        # constructing the derived objects validates the remaining fields
        self.noise()
        self.bank()

    @property
    def steps(self) -> int:
        return int(round(self.duration / self.dt))

    @property
    def obs_every(self) -> int:
        return int(round(1.0 / (self.obs_rate * self.dt)))

    def odometry(self) -> OdometryInput:
        return OdometryInput(self.omega, self.v, self.dt)

    def noise(self) -> NoiseParams:
        return NoiseParams(
            sigma_omega2=self.sigma_omega2,
            sigma_v2=self.sigma_v2,
            kappa_b=self.kappa_b,
            sigma_r2=self.sigma_r2,
        )

    def landmark(self) -> Landmark:
        return Landmark(self.landmark_x, self.landmark_y)

    def bank(self) -> ModuleBank:
        return ModuleBank.geometric(self.lambda_smallest, self.lambda_ratio, self.module_count)

    @property
    def coverage(self) -> tuple[float, float]:
        return (self.coverage_lo, self.coverage_hi)

    def with_overrides(self, **changes) -> "TrialConfig":
        return replace(self, **changes)

    def to_text(self) -> str:
        """Canonical ``section.key = value`` serialization (round-trips)."""
        lines = []
        for key, (attr, _) in SCHEMA.items():
            value = getattr(self, attr)
            if isinstance(value, tuple):
                text = ", ".join(value)
            elif isinstance(value, bool):
                text = "true" if value else "false"
            elif isinstance(value, float):
                text = repr(value)
            else:
                text = str(value)
            lines.append(f"{key} = {text}")
        return "\n".join(lines) + "\n"


def parse_config(text: str) -> TrialConfig:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ConfigError(f"line {lineno}: expected 'section.key = value', got {raw!r}")
        if key not in SCHEMA:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        attr, parser = SCHEMA[key]
        if attr in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        try:
            values[attr] = parser(value)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key!r}: {exc}") from exc
    try:
        return TrialConfig(**values)
    except DomainError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path) -> TrialConfig:
    return parse_config(Path(path).read_text())


def paper_fig2_text() -> str:
    return resources.files("locsim.data").joinpath("paper_fig2.cfg").read_text()


def paper_fig2_config() -> TrialConfig:
    """The shipped benchmark scenario."""
    return parse_config(paper_fig2_text())


assert {attr for attr, _ in SCHEMA.values()} == {f.name for f in fields(TrialConfig)}
