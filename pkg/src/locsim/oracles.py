"""Independent reference computations for the library's numerics.

Nothing here calls the code paths it checks: Bessel ratios come from
adaptive quadrature of the integral definition, posteriors from grid
Bayes, moments from Monte Carlo, derivatives from central differences
and the SE(2) exponential from ODE integration. ``locsim oracle`` runs
the registered comparisons and prints one row per quantity.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

TWO_PI = 2.0 * math.pi


# --- primitive oracles -------------------------------------------------------


def quad_bessel_scaled(kappa: float, p: int) -> float:
    """exp(-kappa) I_p(kappa) = (1/pi) int_0^pi cos(p t) exp(kappa (cos t - 1)) dt."""

    def f(t):
        return math.cos(p * t) * math.exp(kappa * (math.cos(t) - 1.0))

    points = [min(math.pi / 2, 12.0 / math.sqrt(kappa))] if kappa > 1.0 else None
    with warnings.catch_warnings():
        # roundoff near the requested tolerance is expected for large kappa
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, _ = integrate.quad(f, 0.0, math.pi, epsabs=0.0, epsrel=1e-13, limit=400, points=points)
    return val / math.pi


def quad_bessel_ratio(kappa: float, n: int = 1) -> float:
    """I_n(kappa) / I_0(kappa) by quadrature."""
    if kappa == 0.0:
        return 0.0
    return quad_bessel_scaled(kappa, n) / quad_bessel_scaled(kappa, 0)


def quad_a_inv(r: float, tol: float = 1e-13) -> float:
    """Bisection inverse of the quadrature A(kappa)."""
    lo, hi = 0.0, 1.0
    while quad_bessel_ratio(hi) < r:
        hi *= 2.0
    while hi - lo > tol * hi:
        mid = 0.5 * (lo + hi)
        if quad_bessel_ratio(mid) < r:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def circle_grid(npts: int = 4096) -> np.ndarray:
    return -math.pi + TWO_PI * np.arange(npts) / npts


def grid_density(mu: float, kappa: float, grid: np.ndarray) -> np.ndarray:
    """vM density normalized numerically on a uniform circle grid."""
    w = np.exp(kappa * (np.cos(grid - mu) - 1.0))
    return w / (w.sum() * (TWO_PI / grid.size))


def grid_posterior(prior, likelihood, grid: np.ndarray) -> np.ndarray:
    """Normalized prior x likelihood on the grid (``prior``/``likelihood`` are (mu, kappa))."""
    logw = prior[1] * (np.cos(grid - prior[0]) - 1.0) + likelihood[1] * (np.cos(grid - likelihood[0]) - 1.0)
    w = np.exp(logw - logw.max())
    return w / (w.sum() * (TWO_PI / grid.size))


def total_variation(p: np.ndarray, q: np.ndarray, dx: float) -> float:
    return 0.5 * float(np.sum(np.abs(p - q)) * dx)


def mc_first_moment(angles: np.ndarray) -> tuple[complex, float, float]:
    """Empirical E[exp(i t)] and the standard errors of its real and imaginary parts."""
    c, s = np.cos(angles), np.sin(angles)
    n = angles.size
    return complex(c.mean(), s.mean()), float(c.std(ddof=1) / math.sqrt(n)), float(s.std(ddof=1) / math.sqrt(n))


def mc_conditioned_angles(
    phi: float, d: float, sigma2: float, r0: float, halfwidth: float, n_accept: int, rng: np.random.Generator
) -> np.ndarray:
    """Angles of N(d [cos phi, sin phi], sigma2 I) samples whose radius is within r0 +/- halfwidth."""
    sd = math.sqrt(sigma2)
    out = []
    got = 0
    while got < n_accept:
        xy = rng.normal(size=(2, 1_000_000)) * sd
        xy[0] += d * math.cos(phi)
        xy[1] += d * math.sin(phi)
        r = np.hypot(xy[0], xy[1])
        keep = np.abs(r - r0) <= halfwidth
        ang = np.arctan2(xy[1][keep], xy[0][keep])
        out.append(ang)
        got += ang.size
    return np.concatenate(out)[:n_accept]


def histogram_tv(angles: np.ndarray, mu: float, kappa: float, bins: int = 72) -> float:
    """TV distance between an angle histogram and bin-integrated vM(mu, kappa)."""
    edges = np.linspace(-math.pi, math.pi, bins + 1)
    counts, _ = np.histogram(angles, bins=edges)
    emp = counts / counts.sum()
    fine = circle_grid(bins * 64) + math.pi / (bins * 64)
    dens = grid_density(mu, kappa, fine) * (TWO_PI / fine.size)
    ref = dens.reshape(bins, 64).sum(axis=1)
    return 0.5 * float(np.abs(emp - ref).sum())


def central_difference(f, x, h: float = 1e-6) -> np.ndarray:
    """Jacobian of a vector function by central differences."""
    x = np.asarray(x, dtype=float)
    f0 = np.atleast_1d(f(x))
    J = np.zeros((f0.size, x.size))
    for j in range(x.size):
        e = np.zeros_like(x)
        e[j] = h
        J[:, j] = (np.atleast_1d(f(x + e)) - np.atleast_1d(f(x - e))) / (2.0 * h)
    return J


def ode_se2_exp(v) -> np.ndarray:
    """Integrate dg/dt = g xi^ for t in [0, 1] starting at the identity."""
    w, vx, vy = (float(c) for c in v)
    hat = np.array([[0.0, -w, vx], [w, 0.0, vy], [0.0, 0.0, 0.0]])

    def rhs(_, y):
        return (y.reshape(3, 3) @ hat).ravel()

    sol = integrate.solve_ivp(rhs, (0.0, 1.0), np.eye(3).ravel(), rtol=1e-12, atol=1e-13, method="DOP853")
    return sol.y[:, -1].reshape(3, 3)


# --- one-step scenario oracles ----------------------------------------------

#: Benchmark one-step scenario: start at the origin facing +x.
SCENARIO = dict(
    dt=0.02, omega=0.2, v=0.1, sigma_omega2=10.0, sigma_v2=1e-4, kappa_b=500.0, sigma_r2=1e-4,
    kappa0=100.0, var0=0.01, lm=(2.0, 3.0), lambdas=(2.5, 3.75, 5.625, 8.4375),
)


def _noise_free_measurement(theta, x, y, lm):
    dx, dy = lm[0] - x, lm[1] - y
    b = math.atan2(dy, dx) - theta
    return math.atan2(math.sin(b), math.cos(b)), math.hypot(dx, dy)


def scripted_mixture_step(sc=SCENARIO) -> dict:
    """Hand-written time update + bearing/range update from the origin."""
    A = quad_bessel_ratio
    dt, v = sc["dt"], sc["v"]
    k0, var0 = sc["kappa0"], sc["var0"]
    # heading time update
    kw = 1.0 / (sc["sigma_omega2"] * dt * dt)
    k1 = quad_a_inv(A(k0) * A(kw))
    th1 = sc["omega"] * dt
    # position time update, uses the heading before the update (theta = 0)
    x1 = v * dt * A(k0) * math.cos(0.0)
    y1 = v * dt * A(k0) * math.sin(0.0)
    var1 = var0 + (sc["sigma_v2"] + v * v) * dt * dt
    # truth after one noise-free Euler step is (omega dt, v dt, 0)
    s_b, s_r = _noise_free_measurement(th1, v * dt, 0.0, sc["lm"])
    lx, ly = sc["lm"]
    scale = s_r * A(k1) * A(sc["kappa_b"])
    ox = lx - scale * math.cos(th1 + s_b)
    oy = ly - scale * math.sin(th1 + s_b)
    ovar = sc["sigma_r2"] + s_r * s_r
    gain = var1 / (ovar + var1)
    x2, y2 = x1 + gain * (ox - x1), y1 + gain * (oy - y1)
    var2 = 1.0 / (1.0 / var1 + 1.0 / ovar)
    rbar = math.hypot(lx - x1, ly - y1)
    kdir = rbar * s_r / (2.0 * var1)
    k2 = quad_a_inv(A(kdir) * A(sc["kappa_b"]))
    th2 = math.atan2(ly - y1, lx - x1) - s_b
    return dict(
        kappa_after_time=k1, theta_after_time=th1, x_after_time=x1, var_after_time=var1,
        s_b=s_b, s_r=s_r, obs_x=ox, obs_y=oy, x=x2, y=y2, var=var2, theta=th2, kappa=k2,
    )


def scripted_circular_step(sc=SCENARIO) -> dict:
    """Hand-written circular time update + bearing/range update from the origin."""
    A = quad_bessel_ratio
    dt, v = sc["dt"], sc["v"]
    k0, var0 = sc["kappa0"], sc["var0"]
    lams = sc["lambdas"]
    kw = 1.0 / (sc["sigma_omega2"] * dt * dt)
    k1 = quad_a_inv(A(k0) * A(kw))
    th1 = sc["omega"] * dt
    step_var = dt * dt * (sc["sigma_v2"] + v * v)
    phase_k0 = [lam**2 / (4 * math.pi**2 * var0) for lam in lams]
    phase_kw = [lam**2 / (4 * math.pi**2 * step_var) for lam in lams]
    phi1 = [2 * math.pi * v * A(k0) * dt / lam for lam in lams]
    kphi1 = [quad_a_inv(A(a) * A(b)) for a, b in zip(phase_k0, phase_kw)]
    s_b, s_r = _noise_free_measurement(th1, v * dt, 0.0, sc["lm"])
    lx, ly = sc["lm"]
    scale = s_r * A(k1) * A(sc["kappa_b"])
    ox = lx - scale * math.cos(th1 + s_b)
    ovar = sc["sigma_r2"] + s_r * s_r
    obs_phase = [math.remainder(2 * math.pi * ox / lam, 2 * math.pi) for lam in lams]
    obs_k = [lam**2 / (4 * math.pi**2 * ovar) for lam in lams]
    phi2, kphi2 = [], []
    for mp, kp, mo, ko in zip(phi1, kphi1, obs_phase, obs_k):
        z = kp * complex(math.cos(mp), math.sin(mp)) + ko * complex(math.cos(mo), math.sin(mo))
        phi2.append(math.atan2(z.imag, z.real))
        kphi2.append(abs(z))
    # readout before the update: y phases stay 0, x phases encode ~x1
    return dict(
        kappa_after_time=k1, phase_after_time=phi1, phase_kappa_after_time=kphi1,
        obs_x=ox, obs_phase=obs_phase, obs_kappa=obs_k, phase=phi2, phase_kappa=kphi2,
        var_proxy=1.0 / kphi1[-1], s_b=s_b, s_r=s_r,
    )


# --- registry used by the CLI ------------------------------------------------


@dataclass
class Row:
    quantity: str
    value: float
    oracle: float
    tol: float

    @property
    def err(self) -> float:
        return abs(self.value - self.oracle)

    @property
    def ok(self) -> bool:
        return self.err <= self.tol


def _rows_bessel():
    from locsim.circstats import bessel_ratio

    cases = [(0.0, 1), (2.0, 1), (2.0, 2), (10.0, 1), (250.0, 1), (500.0, 3)]
    return [
        Row(f"I_{n}/I_0({k:g})", bessel_ratio(k, n), quad_bessel_ratio(k, n), 1e-10 * max(1.0, quad_bessel_ratio(k, n)))
        for k, n in cases
    ]


def _rows_a_inv():
    from locsim.circstats import a_func, a_inv

    rows = []
    for r in (0.1, 0.5, 0.9, 0.99):
        rows.append(Row(f"a_inv({r:g})", a_inv(r), quad_a_inv(r), 1e-8 * quad_a_inv(r)))
    target = quad_bessel_ratio(250.0) ** 2
    rows.append(Row("a_inv(A(250)^2)", a_inv(a_func(250.0) ** 2), quad_a_inv(target), 1e-7))
    return rows


def _rows_convolution():
    from locsim.circstats import VonMises, convolve_approx, sample, trig_moment

    rng = np.random.default_rng(7)
    a, b = VonMises(0.4, 4.0), VonMises(-1.1, 7.0)
    res = trig_moment(convolve_approx(a, b))
    m, se_re, se_im = mc_first_moment(sample(a, rng, 10**6) + sample(b, rng, 10**6))
    return [
        Row("Re E[exp(i(t1+t2))]", res.re, m.real, 3 * se_re),
        Row("Im E[exp(i(t1+t2))]", res.im, m.imag, 3 * se_im),
    ]


def _rows_bayes():
    from locsim.circstats import VonMises, multiply

    grid = circle_grid()
    rows = []
    for prior, lik in [((0.0, 2.0), (math.pi / 2, 1.0)), ((1.0, 3.0), (1.0, 2.0)), ((-2.5, 0.7), (2.9, 15.0))]:
        post = multiply(VonMises(*prior), VonMises(*lik))
        tv = total_variation(grid_density(post.mu, post.kappa, grid), grid_posterior(prior, lik, grid), TWO_PI / grid.size)
        rows.append(Row(f"TV post vM{prior} x vM{lik}", tv, 0.0, 1e-6))
    return rows


def _rows_conditioning():
    rng = np.random.default_rng(11)
    ang = mc_conditioned_angles(math.pi / 4, 2.0, 0.5, 3.0, 0.01, 10**5, rng)
    return [Row("TV conditioned angle vs vM(pi/4, 12)", histogram_tv(ang, math.pi / 4, 12.0), 0.0, 0.02)]


def _rows_kalman():
    from locsim.scalar_filters import KfState, kf_obsv, kf_time

    s = kf_obsv(KfState(2.0, 0.5), 3.0, 0.25)
    t = kf_time(KfState(0.0, 1.0), 2.0, 0.5)
    return [
        Row("kf_obsv mean", s.mean, 2.0 + 0.5 / 0.75, 1e-12),
        Row("kf_obsv var", s.var, 1.0 / 6.0, 1e-12),
        Row("kf_time mean", t.mean, 2.0, 0.0),
        Row("kf_time var", t.var, 1.5, 0.0),
    ]


def _rows_mixture_step():
    from locsim import mixture_loc as ml
    from locsim.model import Landmark, NoiseParams, OdometryInput

    sc = SCENARIO
    ref = scripted_mixture_step(sc)
    n = NoiseParams(sigma_omega2=sc["sigma_omega2"], sigma_v2=sc["sigma_v2"], kappa_b=sc["kappa_b"], sigma_r2=sc["sigma_r2"])
    b = ml.MixtureBelief.at(0.0, 0.0, 0.0, sc["kappa0"], sc["var0"])
    b1 = ml.time_update(b, OdometryInput(sc["omega"], sc["v"], sc["dt"]), n)
    b2 = ml.obsv_bearing_distance(b1, Landmark(*sc["lm"]), ref["s_b"], ref["s_r"], n)
    return [
        Row("kappa after time update", b1.heading.kappa, ref["kappa_after_time"], 1e-7 * ref["kappa_after_time"]),
        Row("x after time update", b1.x.mean, ref["x_after_time"], 1e-14),
        Row("var after time update", b1.x.var, ref["var_after_time"], 1e-15),
        Row("x after observation", b2.x.mean, ref["x"], 1e-12),
        Row("y after observation", b2.y.mean, ref["y"], 1e-12),
        Row("var after observation", b2.x.var, ref["var"], 1e-14),
        Row("heading after observation", b2.heading.mu, ref["theta"], 1e-12),
        Row("kappa after observation", b2.heading.kappa, ref["kappa"], 1e-7 * ref["kappa"]),
    ]


def _rows_circular_step():
    from locsim import circular_loc as cl
    from locsim.model import Landmark, NoiseParams, OdometryInput

    sc = SCENARIO
    ref = scripted_circular_step(sc)
    n = NoiseParams(sigma_omega2=sc["sigma_omega2"], sigma_v2=sc["sigma_v2"], kappa_b=sc["kappa_b"], sigma_r2=sc["sigma_r2"])
    bank = cl.ModuleBank(sc["lambdas"])
    b = cl.CircularBelief.at(0.0, 0.0, 0.0, sc["kappa0"], sc["var0"], bank)
    b1 = cl.time_update(b, OdometryInput(sc["omega"], sc["v"], sc["dt"]), n)
    b2 = cl.obsv_bearing_distance(b1, Landmark(*sc["lm"]), ref["s_b"], ref["s_r"], n)
    rows = [Row("variance proxy", b1.position_variance(), ref["var_proxy"], 1e-9 * ref["var_proxy"])]
    for i in range(bank.m):
        rows += [
            Row(f"phi_{i + 1} after time update", b1.phi[i].mu, ref["phase_after_time"][i], 1e-13),
            Row(f"kappa_phi_{i + 1} after time", b1.phi[i].kappa, ref["phase_kappa_after_time"][i], 1e-7 * ref["phase_kappa_after_time"][i]),
            Row(f"phi_{i + 1} after observation", b2.phi[i].mu, ref["phase"][i], 1e-9),
            Row(f"kappa_phi_{i + 1} after obs", b2.phi[i].kappa, ref["phase_kappa"][i], 1e-7 * ref["phase_kappa"][i]),
        ]
    return rows


def _rows_jacobian():
    from locsim.baselines import measurement_jacobian, measurement_model, motion_jacobian, motion_model
    from locsim.model import Landmark, OdometryInput

    rng = np.random.default_rng(3)
    lm, u = Landmark(2.0, 3.0), OdometryInput(0.2, 0.1, 0.02)
    worst_h = worst_f = 0.0
    for _ in range(100):
        pose = np.array([rng.uniform(-3, 3), rng.uniform(-1.5, 1.0), rng.uniform(-1.5, 1.0)])
        Jh = central_difference(lambda p: measurement_model(p, lm), pose)
        Jf = central_difference(lambda p: motion_model(p, u), pose)
        worst_h = max(worst_h, float(np.abs(Jh - measurement_jacobian(pose, lm)).max()))
        worst_f = max(worst_f, float(np.abs(Jf - motion_jacobian(pose, u)).max()))
    return [Row("max |H - FD|", worst_h, 0.0, 1e-6), Row("max |F - FD|", worst_f, 0.0, 1e-6)]


def _rows_se2():
    from locsim.baselines import se2_exp

    rows = []
    for v in [(0.3, 1.0, -2.0), (2.5, 0.2, 0.7), (1e-9, 1.0, 1.0), (-3.0, -0.5, 0.1)]:
        rows.append(Row(f"|exp{v} - ODE|", float(np.abs(se2_exp(v) - ode_se2_exp(v)).max()), 0.0, 1e-9))
    return rows


ORACLES = {
    "bessel": _rows_bessel,
    "a-inv": _rows_a_inv,
    "convolution": _rows_convolution,
    "bayes": _rows_bayes,
    "conditioning": _rows_conditioning,
    "kalman": _rows_kalman,
    "mixture-step": _rows_mixture_step,
    "circular-step": _rows_circular_step,
    "jacobian": _rows_jacobian,
    "se2": _rows_se2,
}


def run_oracle(name: str) -> list[tuple[str, list[Row]]]:
    names = list(ORACLES) if name == "all" else [name]
    unknown = [n for n in names if n not in ORACLES]
    if unknown:
        raise KeyError(f"unknown oracle {unknown[0]!r}; choose from {sorted(ORACLES)} or 'all'")
    return [(n, ORACLES[n]()) for n in names]
