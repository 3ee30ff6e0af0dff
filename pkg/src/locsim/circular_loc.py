"""Fully circular localization: position held as phases of several periodic modules.

Each axis is represented by M von Mises phase beliefs, one per spatial
period lambda_i. Every update is a von Mises filter step; Cartesian
position is recovered by maximizing the summed phase likelihood over
the coverage interval.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from fractions import Fraction
from functools import reduce

import numpy as np

from locsim.circstats import TWO_PI, VonMises, a_func, wrap
from locsim.errors import DomainError, NoInformationError
from locsim.mixture_loc import equivalent_position, reconstruct_heading
from locsim.model import Landmark, NoiseParams, OdometryInput
from locsim.scalar_filters import vmf_obsv, vmf_time

DEFAULT_RESOLUTION = 0.005
DEFAULT_COVERAGE = (-5.0, 5.0)

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
_REFINE_TOL = 1e-6


@dataclass(frozen=True)
class ModuleBank:
    """Spatial periods lambda_1 < ... < lambda_M (m) with a constant ratio."""

    lambdas: tuple[float, ...]

    def __post_init__(self):
        lams = tuple(float(v) for v in self.lambdas)
        if not lams:
            raise DomainError("a module bank needs at least one period")
        if any(not (v > 0.0 and math.isfinite(v)) for v in lams):
            raise DomainError(f"periods must be positive and finite, got {lams}")
        if any(b <= a for a, b in zip(lams, lams[1:])):
            raise DomainError(f"periods must be strictly increasing, got {lams}")
        ratios = [b / a for a, b in zip(lams, lams[1:])]
        if ratios and max(ratios) - min(ratios) > 1e-9 * ratios[0]:
            raise DomainError(f"adjacent periods must share one ratio, got {ratios}")
        object.__setattr__(self, "lambdas", lams)

    @classmethod
    def geometric(cls, smallest: float = 2.5, ratio: float = 1.5, m: int = 4) -> "ModuleBank":
        return cls(tuple(smallest * ratio**i for i in range(m)))

    @property
    def m(self) -> int:
        return len(self.lambdas)

    @cached_property
    def common_period(self) -> float:
        """Smallest length after which all module phases repeat together.

        Periods are treated as rationals (denominator <= 1e6); returns
        ``inf`` when they are incommensurate at that precision.
        """
        fracs = [Fraction(v).limit_denominator(10**6) for v in self.lambdas]
        num = reduce(math.lcm, (f.numerator for f in fracs))
        den = reduce(math.gcd, (f.denominator for f in fracs))
        period = num / den
        if any(abs(period / v - round(period / v)) > 1e-6 for v in self.lambdas):
            return math.inf
        return period


def phase_kappa(lam: float, variance: float) -> float:
    """Phase concentration lambda^2 / (4 pi^2 variance) of a Cartesian variance."""
    if variance == 0.0:
        return math.inf
    return lam * lam / (4.0 * math.pi**2 * variance)


def _check_coverage(coverage: tuple[float, float]) -> tuple[float, float]:
    lo, hi = (float(c) for c in coverage)
    if not hi > lo:
        raise DomainError(f"coverage interval must be non-empty, got {coverage}")
    return lo, hi


@dataclass(frozen=True)
class CircularBelief:
    heading: VonMises
    phi: tuple[VonMises, ...]
    psi: tuple[VonMises, ...]
    bank: ModuleBank
    coverage_x: tuple[float, float] = DEFAULT_COVERAGE
    coverage_y: tuple[float, float] = field(default=DEFAULT_COVERAGE)

    def __post_init__(self):
        object.__setattr__(self, "phi", tuple(self.phi))
        object.__setattr__(self, "psi", tuple(self.psi))
        if len(self.phi) != self.bank.m or len(self.psi) != self.bank.m:
            raise DomainError(
                f"expected {self.bank.m} phases per axis, got {len(self.phi)} and {len(self.psi)}"
            )
        period = self.bank.common_period
        for cov in (self.coverage_x, self.coverage_y):
            lo, hi = _check_coverage(cov)
            if hi - lo > period:
                raise DomainError(f"coverage {cov} exceeds the common period {period:g}; decoding is ambiguous")

    @classmethod
    def at(
        cls,
        theta: float,
        x: float,
        y: float,
        kappa: float,
        var: float,
        bank: ModuleBank,
        coverage_x: tuple[float, float] = DEFAULT_COVERAGE,
        coverage_y: tuple[float, float] = DEFAULT_COVERAGE,
    ) -> "CircularBelief":
        """Belief centered on a pose, with Cartesian variance ``var`` per axis."""
        phi, psi = encode(x, y, bank, coverage_x, coverage_y)
        kappas = [phase_kappa(lam, var) for lam in bank.lambdas]
        return cls(
            VonMises(theta, kappa),
            tuple(VonMises(p, k) for p, k in zip(phi, kappas)),
            tuple(VonMises(p, k) for p, k in zip(psi, kappas)),
            bank,
            coverage_x,
            coverage_y,
        )

    def position_variance(self) -> float:
        """Variance proxy: 1/kappa of the largest-period module, worst axis."""
        kappas = (self.phi[-1].kappa, self.psi[-1].kappa)
        return max(math.inf if k == 0.0 else 1.0 / k for k in kappas)


def encode(
    x: float,
    y: float,
    bank: ModuleBank,
    coverage_x: tuple[float, float] = DEFAULT_COVERAGE,
    coverage_y: tuple[float, float] | None = None,
) -> tuple[list[float], list[float]]:
    """Phases wrap(2 pi x / lambda_i) and wrap(2 pi y / lambda_i)."""
    coverage_y = coverage_x if coverage_y is None else coverage_y
    for value, cov, name in ((x, coverage_x, "x"), (y, coverage_y, "y")):
        lo, hi = _check_coverage(cov)
        if not lo <= value <= hi:
            raise DomainError(f"{name}={value!r} outside coverage [{lo}, {hi}]")
    return (
        [wrap(TWO_PI * x / lam) for lam in bank.lambdas],
        [wrap(TWO_PI * y / lam) for lam in bank.lambdas],
    )


def time_update(b: CircularBelief, u: OdometryInput, n: NoiseParams) -> CircularBelief:
    a = a_func(b.heading.kappa)
    cos_t, sin_t = math.cos(b.heading.mu), math.sin(b.heading.mu)
    heading = vmf_time(b.heading, u.omega * u.dt, n.heading_kappa_w(u.dt))
    step_var = u.dt * u.dt * (n.sigma_v2 + u.v * u.v)
    phi, psi = [], []
    for lam, p, q in zip(b.bank.lambdas, b.phi, b.psi):
        advance = TWO_PI * u.v * a * u.dt / lam
        kappa_w = phase_kappa(lam, step_var)
        phi.append(vmf_time(p, advance * cos_t, kappa_w))
        psi.append(vmf_time(q, advance * sin_t, kappa_w))
    return CircularBelief(heading, tuple(phi), tuple(psi), b.bank, b.coverage_x, b.coverage_y)


def _observe_phases(
    phases: tuple[VonMises, ...], lambdas: tuple[float, ...], o: float, variance: float
) -> tuple[VonMises, ...]:
    return tuple(
        vmf_obsv(p, wrap(TWO_PI * o / lam), phase_kappa(lam, variance)) for p, lam in zip(phases, lambdas)
    )


def obsv_direct(b: CircularBelief, o_theta: float, o_x: float, o_y: float, n: NoiseParams) -> CircularBelief:
    lams = b.bank.lambdas
    return CircularBelief(
        vmf_obsv(b.heading, o_theta, n.kappa_nu_theta),
        _observe_phases(b.phi, lams, o_x, n.sigma2_ox),
        _observe_phases(b.psi, lams, o_y, n.sigma2_oy),
        b.bank,
        b.coverage_x,
        b.coverage_y,
    )


def obsv_bearing_distance(
    b: CircularBelief,
    lm: Landmark,
    s_b: float,
    s_r: float,
    n: NoiseParams,
    resolution: float = DEFAULT_RESOLUTION,
    literal: bool = False,
) -> CircularBelief:
    """Bearing/range update on the phase representation.

    The current position is read out, the heading is replaced by the
    reconstruction from the landmark geometry (with the largest-period
    variance proxy), and the equivalent Cartesian position is fused into
    every module as a phase observation.
    """
    x_bar = readout(b, "x", resolution)
    y_bar = readout(b, "y", resolution)
    heading = reconstruct_heading(x_bar, y_bar, b.position_variance(), lm, s_b, s_r, n, literal)
    o_x, o_y, var = equivalent_position(b.heading, lm, s_b, s_r, n)
    lams = b.bank.lambdas
    return CircularBelief(
        heading,
        _observe_phases(b.phi, lams, o_x, var),
        _observe_phases(b.psi, lams, o_y, var),
        b.bank,
        b.coverage_x,
        b.coverage_y,
    )


def readout_score(x, means, kappas, lambdas):
    """Summed phase log-likelihood sum_i kappa_i cos(2 pi x / lambda_i - mean_i)."""
    x = np.asarray(x, dtype=float)
    total = np.zeros_like(x)
    for mu, k, lam in zip(means, kappas, lambdas):
        total += k * np.cos(TWO_PI * x / lam - mu)
    return total


@lru_cache(maxsize=64)
def _grid_basis(lambdas: tuple[float, ...], lo: float, hi: float, resolution: float):
    steps = max(1, int(math.ceil((hi - lo) / resolution - 1e-9)))
    grid = np.linspace(lo, hi, steps + 1)
    arg = np.outer(grid, [TWO_PI / lam for lam in lambdas])
    # score(x) = sum_i k_i cos(w_i x) cos(mu_i) + k_i sin(w_i x) sin(mu_i)
    basis = np.hstack([np.cos(arg), np.sin(arg)])
    order = np.lexsort((grid, np.abs(grid)))
    rank = np.empty_like(order)
    rank[order] = np.arange(order.size)
    return grid, basis, rank


def decode(
    means, kappas, lambdas, coverage: tuple[float, float], resolution: float = DEFAULT_RESOLUTION
) -> float:
    """Maximum-likelihood position of a set of module phases.

    Brute-force search over the coverage grid (step ``resolution``),
    ties broken toward the smallest |x| and then the smallest x,
    followed by one golden-section refinement over the neighbouring
    grid cells. The result is clipped to the coverage.
    """
    if not resolution > 0.0:
        raise DomainError(f"resolution must be > 0, got {resolution!r}")
    lo, hi = _check_coverage(coverage)
    if all(k == 0.0 for k in kappas):
        raise NoInformationError("all phase concentrations are zero")
    grid, basis, rank = _grid_basis(tuple(lambdas), lo, hi, float(resolution))
    weights = np.concatenate([np.multiply(kappas, np.cos(means)), np.multiply(kappas, np.sin(means))])
    score = basis @ weights
    best = score.max()
    tied = np.flatnonzero(score >= best - 1e-9 * sum(kappas))
    idx = int(tied[np.argmin(rank[tied])])
    a = grid[max(idx - 1, 0)]
    b = grid[min(idx + 1, grid.size - 1)]
    terms = [(k, TWO_PI / lam, mu) for mu, k, lam in zip(means, kappas, lambdas)]

    def scalar_score(t: float) -> float:
        return sum(k * math.cos(w * t - mu) for k, w, mu in terms)

    x = _golden_max(scalar_score, a, b)
    if scalar_score(x) < scalar_score(grid[idx]):
        x = float(grid[idx])
    return min(max(x, lo), hi)


def _golden_max(f, a: float, b: float) -> float:
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while b - a > _REFINE_TOL:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def readout(b: CircularBelief, axis: str = "x", resolution: float = DEFAULT_RESOLUTION) -> float:
    """Cartesian estimate along ``axis`` ('x' or 'y')."""
    if axis == "x":
        phases, coverage = b.phi, b.coverage_x
    elif axis == "y":
        phases, coverage = b.psi, b.coverage_y
    else:
        raise DomainError(f"axis must be 'x' or 'y', got {axis!r}")
    return decode([p.mu for p in phases], [p.kappa for p in phases], b.bank.lambdas, coverage, resolution)
