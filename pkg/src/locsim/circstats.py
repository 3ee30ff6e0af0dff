"""Von Mises distribution core.

Bessel-function ratios, trigonometric moments, the moment-matched
convolution rule, exact product closure, the Gaussian-conditioning
construction and sampling. Angles are canonicalized to [-pi, pi).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import i0e

from locsim.errors import DegenerateFusionError, DomainError

TWO_PI = 2.0 * math.pi

#: Resultant lengths below this make a product of two densities undefined.
DEGENERATE_RESULTANT = 1e-12

#: Largest argument accepted by :func:`a_inv`; larger inputs are clamped.
A_INV_CLAMP = 1.0 - 1e-15

_CF_TOL = 1e-15
_GAUSS_CF_MAX = 35.0
_CF_MAXITER = 1000
_NEWTON_DONE = 1e-9


def wrap(angle: float) -> float:
    """Map an angle in radians onto [-pi, pi)."""
    r = math.fmod(angle + math.pi, TWO_PI)
    if r < 0.0:
        r += TWO_PI
    if r >= TWO_PI:
        r -= TWO_PI
    return r - math.pi


def wrap_array(angles) -> np.ndarray:
    """Vectorized :func:`wrap`."""
    out = np.mod(np.asarray(angles, dtype=float) + math.pi, TWO_PI)
    out[out >= TWO_PI] -= TWO_PI
    return out - math.pi


def angdiff(a: float, b: float) -> float:
    """Wrapped difference ``a - b`` in [-pi, pi)."""
    return wrap(a - b)


@dataclass(frozen=True)
class VonMises:
    """Circular belief vM(mu, kappa).

    ``kappa == 0`` is the circular uniform distribution.
    """

    mu: float
    kappa: float

    def __post_init__(self):
        mu = float(self.mu)
        kappa = float(self.kappa)
        if not math.isfinite(mu):
            raise DomainError(f"mean direction must be finite, got {mu!r}")
        if not math.isfinite(kappa) or kappa < 0.0:
            raise DomainError(f"concentration must be finite and >= 0, got {kappa!r}")
        object.__setattr__(self, "mu", wrap(mu))
        object.__setattr__(self, "kappa", kappa)

    def pdf(self, theta):
        """Density evaluated at ``theta`` (scalar or array)."""
        theta = np.asarray(theta, dtype=float)
        return np.exp(self.kappa * (np.cos(theta - self.mu) - 1.0)) / (TWO_PI * i0e(self.kappa))

    @property
    def variance_proxy(self) -> float:
        """Gaussian-equivalent variance ``1/kappa``."""
        return variance_from_kappa(self.kappa)


@dataclass(frozen=True)
class TrigMoment:
    """Complex trigonometric moment E[exp(i n theta)]."""

    re: float
    im: float

    @property
    def value(self) -> complex:
        return complex(self.re, self.im)

    @property
    def modulus(self) -> float:
        return math.hypot(self.re, self.im)

    @property
    def angle(self) -> float:
        return math.atan2(self.im, self.re)


def _check_kappa(kappa: float) -> float:
    try:
        kappa = float(kappa)
    except (TypeError, ValueError) as exc:
        raise DomainError(f"concentration must be a real number, got {kappa!r}") from exc
    if not math.isfinite(kappa) or kappa < 0.0:
        raise DomainError(f"concentration must be finite and >= 0, got {kappa!r}")
    return kappa


def _perron_ratio(order: int, x: float) -> float:
    """I_order(x) / I_{order-1}(x) via Perron's continued fraction.

    The fraction is x / (b0 + a1/(b1 + a2/(b2 + ...))) with
    b0 = 2v + x, a_k = -(2v + 2k - 1) x, b_k = 2v + k + 2x, evaluated
    with the modified Lentz algorithm. It needs only a few terms for
    large x, where the Gauss fraction converges slowly.
    """
    tiny = 1e-300
    f = 2.0 * order + x
    c = f
    d = 0.0
    for k in range(1, _CF_MAXITER):
        a = -(2.0 * order + 2.0 * k - 1.0) * x
        b = 2.0 * order + k + 2.0 * x
        d = b + a * d
        if d == 0.0:
            d = tiny
        c = b + a / c
        if c == 0.0:
            c = tiny
        d = 1.0 / d
        delta = c * d
        f *= delta
        if abs(delta - 1.0) < _CF_TOL:
            break
    return x / f


def _gauss_ratio(order: int, x: float) -> float:
    """I_order(x) / I_{order-1}(x) from the Gauss fraction, summed backward.

    Runs the downward recurrence from a zero tail far enough above
    ``order`` that the truncation error is below double precision.
    """
    start = order + int(10.0 + x + 3.0 * math.sqrt(x))
    r = 0.0
    for k in range(start, order - 1, -1):
        r = 1.0 / (2.0 * k / x + r)
    return r


def bessel_ratio(kappa: float, n: int = 1) -> float:
    """Ratio I_n(kappa) / I_0(kappa) of modified Bessel functions.

    The top ratio I_n/I_{n-1} comes from a continued fraction (Gauss
    form for small kappa, Perron form for large) and the lower ones from
    the stable downward recurrence ``r_k = 1 / (2k/kappa + r_{k+1})``.
    The product is accumulated in the log domain, so no raw Bessel value
    is ever formed and nothing overflows.

    Raises:
        DomainError: if ``kappa`` is negative or non-finite, or ``n < 1``.
    """
    kappa = _check_kappa(kappa)
    if int(n) != n or n < 1:
        raise DomainError(f"order must be an integer >= 1, got {n!r}")
    n = int(n)
    if kappa == 0.0:
        return 0.0
    r = _gauss_ratio(n, kappa) if kappa <= _GAUSS_CF_MAX else _perron_ratio(n, kappa)
    if n == 1:
        return r
    log_prod = 0.0
    for k in range(n, 0, -1):
        if r == 0.0:
            return 0.0
        log_prod += math.log(r)
        if k > 1:
            r = 1.0 / (2.0 * (k - 1) / kappa + r)
    return math.exp(log_prod)


@lru_cache(maxsize=1024)
def a_func(kappa: float) -> float:
    """Mean resultant length A(kappa) = I_1(kappa) / I_0(kappa)."""
    return bessel_ratio(kappa, 1)


def a_deriv(kappa: float) -> float:
    """Derivative A'(kappa) = 1 - A(kappa) (A(kappa) + 1/kappa), kappa > 0."""
    kappa = _check_kappa(kappa)
    if kappa == 0.0:
        raise DomainError("a_deriv requires kappa > 0")
    a = a_func(kappa)
    return 1.0 - a * (a + 1.0 / kappa)


def _a_inv_guess(r: float) -> float:
    # Best & Fisher (1981) piecewise approximation.
    if r < 0.53:
        return 2.0 * r + r**3 + 5.0 * r**5 / 6.0
    if r < 0.85:
        return -0.4 + 1.39 * r + 0.43 / (1.0 - r)
    return 1.0 / (r**3 - 4.0 * r**2 + 3.0 * r)


def _resid_scale(r: float) -> float:
    # residual target shrinks with 1 - r so kappa keeps relative accuracy near r -> 1
    return min(1.0, 1e3 * (1.0 - r))


def a_inv(r: float) -> float:
    """Concentration kappa with A(kappa) = r, for 0 <= r < 1.

    Newton iterations on A, safeguarded by a bracket. A is strictly
    increasing, and the lower bound A(k) > (sqrt(k^2+1) - 1)/k gives the
    initial upper end 2r / (1 - r^2).
    """
    r = float(r)
    if not math.isfinite(r) or r < 0.0 or r >= 1.0:
        raise DomainError(f"a_inv requires 0 <= r < 1, got {r!r}")
    if r == 0.0:
        return 0.0
    r = min(r, A_INV_CLAMP)
    lo, hi = 0.0, 2.0 * r / (1.0 - r * r)
    k = min(max(_a_inv_guess(r), lo), hi)
    for _ in range(100):
        a = a_func(k)
        resid = a - r
        if resid == 0.0:
            return k
        if resid > 0.0:
            hi = k
        else:
            lo = k
        deriv = 1.0 - a * (a + 1.0 / k)
        step = resid / deriv if deriv > 0.0 else math.inf
        k_new = k - step
        if not (lo < k_new < hi):
            k_new = 0.5 * (lo + hi)
        elif abs(step) <= _NEWTON_DONE * k:
            # quadratic convergence: the next error is ~ step**2 / k
            return k_new
        if abs(resid) <= 1e-12 * _resid_scale(r):
            return k_new
        k = k_new
    return k


def trig_moment(d: VonMises, n: int = 1) -> TrigMoment:
    """n-th trigonometric moment exp(i n mu) I_n(kappa)/I_0(kappa)."""
    if int(n) != n or n < 1:
        raise DomainError(f"moment order must be an integer >= 1, got {n!r}")
    rho = bessel_ratio(d.kappa, n)
    z = rho * cmath.exp(1j * n * d.mu)
    return TrigMoment(z.real, z.imag)


def kappa_of_sum(kappa1: float, kappa2: float) -> float:
    """Concentration A^-1(A(k1) A(k2)) of a sum of independent vM variables.

    An infinite concentration stands for a deterministic addend.
    """
    if math.isinf(kappa1):
        return _check_kappa(kappa2) if not math.isinf(kappa2) else math.inf
    if math.isinf(kappa2):
        return _check_kappa(kappa1)
    return a_inv(min(a_func(kappa1) * a_func(kappa2), A_INV_CLAMP))


def convolve_approx(a: VonMises, b: VonMises) -> VonMises:
    """Von Mises matching the first moment of the sum of two vM variables."""
    return VonMises(a.mu + b.mu, kappa_of_sum(a.kappa, b.kappa))


def multiply(prior: VonMises, likelihood: VonMises) -> VonMises:
    """Normalized product of two von Mises densities (exact closure).

    Raises:
        DegenerateFusionError: when the weighted resultant vanishes.
    """
    if likelihood.kappa == 0.0:
        return prior
    if prior.kappa == 0.0:
        return likelihood
    z = likelihood.kappa * cmath.exp(1j * likelihood.mu) + prior.kappa * cmath.exp(1j * prior.mu)
    length = abs(z)
    if length < DEGENERATE_RESULTANT:
        raise DegenerateFusionError(
            f"resultant length {length:.3g} below {DEGENERATE_RESULTANT:g}; fused mean undefined"
        )
    mu = cmath.phase(z)
    # kl cos(mu - ml) + kp cos(mu - mp) is the projection of z onto its own direction
    return VonMises(mu, length)


def vm_from_conditioned_gaussian(phi: float, d: float, sigma2: float, r0: float) -> VonMises:
    """Angle law of an isotropic 2D Gaussian conditioned on its radius.

    For v ~ N(d [cos phi, sin phi], sigma2 I) written as r [cos t, sin t],
    t given r = r0 is vM(phi, r0 d / sigma2).
    """
    if not sigma2 > 0.0:
        raise DomainError(f"sigma2 must be > 0, got {sigma2!r}")
    if d < 0.0:
        raise DomainError(f"d must be >= 0, got {d!r}")
    if not r0 > 0.0:
        raise DomainError(f"r0 must be > 0, got {r0!r}")
    return VonMises(phi, r0 * d / sigma2)


def sample(d: VonMises, rng: np.random.Generator, size=None):
    """Draw angles from ``d`` using the stream ``rng``.

    Returns a float for ``size=None`` and an array otherwise.
    """
    if d.kappa == 0.0:
        out = rng.uniform(-math.pi, math.pi, size=size)
    else:
        out = rng.vonmises(d.mu, d.kappa, size=size)
    if size is None:
        return wrap(float(out))
    return wrap_array(out)


def kappa_from_variance(sigma2: float) -> float:
    """High-concentration surrogate: vM(., 1/sigma2) for N(., sigma2)."""
    if not sigma2 > 0.0 or not math.isfinite(sigma2):
        raise DomainError(f"variance must be positive and finite, got {sigma2!r}")
    return 1.0 / sigma2


def variance_from_kappa(kappa: float) -> float:
    """Inverse of :func:`kappa_from_variance`."""
    if not kappa > 0.0 or not math.isfinite(kappa):
        raise DomainError(f"concentration must be positive and finite, got {kappa!r}")
    return 1.0 / kappa
