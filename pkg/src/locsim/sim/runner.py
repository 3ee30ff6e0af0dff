"""Monte Carlo comparison of the localization algorithms."""

from __future__ import annotations

import logging
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from locsim import baselines, circular_loc, mixture_loc
from locsim.circstats import wrap
from locsim.errors import LocsimError
from locsim.sim.config import TrialConfig
from locsim.sim.truth import NoiseStreams, Pose2, sense, truth_step

log = logging.getLogger(__name__)

CSV_HEADER = "t,theta_err_mean,theta_err_std,pos_err_mean,pos_err_std"


class _Mixture:
    def __init__(self, cfg: TrialConfig):
        self.cfg = cfg

    def init(self):
        c = self.cfg
        return mixture_loc.MixtureBelief.at(c.init_theta, c.init_x, c.init_y, c.init_kappa, c.init_var)

    def predict(self, b, u, n):
        return mixture_loc.time_update(b, u, n)

    def observe(self, b, z, lm, n):
        return mixture_loc.obsv_bearing_distance(b, lm, z[0], z[1], n, literal=self.cfg.literal_kappa)

    def estimate(self, b):
        return b.heading.mu, b.x.mean, b.y.mean


class _Circular:
    def __init__(self, cfg: TrialConfig):
        self.cfg = cfg

    def init(self):
        c = self.cfg
        return circular_loc.CircularBelief.at(
            c.init_theta, c.init_x, c.init_y, c.init_kappa, c.init_var, c.bank(), c.coverage, c.coverage
        )

    def predict(self, b, u, n):
        return circular_loc.time_update(b, u, n)

    def observe(self, b, z, lm, n):
        return circular_loc.obsv_bearing_distance(
            b, lm, z[0], z[1], n, self.cfg.resolution, literal=self.cfg.literal_kappa
        )

    def estimate(self, b):
        res = self.cfg.resolution
        return b.heading.mu, circular_loc.readout(b, "x", res), circular_loc.readout(b, "y", res)


class _Ekf:
    def __init__(self, cfg: TrialConfig):
        self.cfg = cfg

    def _cov(self):
        c = self.cfg
        return np.diag([c.init_cov_theta, c.init_cov_x, c.init_cov_y])

    def init(self):
        c = self.cfg
        return baselines.EkfBelief(np.array([c.init_theta, c.init_x, c.init_y]), self._cov())

    def predict(self, b, u, n):
        return baselines.ekf_predict(b, u, n)

    def observe(self, b, z, lm, n):
        return baselines.ekf_update(b, z, lm, n)

    def estimate(self, b):
        return b.pose


class _LgEkf(_Ekf):
    def init(self):
        c = self.cfg
        return baselines.SE2Belief.at(c.init_theta, c.init_x, c.init_y, self._cov())

    def predict(self, b, u, n):
        return baselines.lgekf_predict(b, u, n)

    def observe(self, b, z, lm, n):
        return baselines.lgekf_update(b, z, lm, n)


ADAPTERS = {"mixture": _Mixture, "circular": _Circular, "ekf": _Ekf, "lgekf": _LgEkf}


@dataclass
class ErrorTrace:
    """Per-step errors of every algorithm over one trial.

    ``theta_err`` and ``pos_err`` map algorithm name to arrays of length
    ``steps + 1`` (index 0 is the initial belief). Entries after a
    filter failure are NaN and the reason is kept in ``failures``.
    """

    t: np.ndarray
    theta_err: dict[str, np.ndarray]
    pos_err: dict[str, np.ndarray]
    failures: dict[str, str] = field(default_factory=dict)


def _errors(est, truth: Pose2) -> tuple[float, float]:
    theta, x, y = est
    return abs(wrap(theta - truth.theta)), math.hypot(x - truth.x, y - truth.y)


def run_trial(cfg: TrialConfig, seed: int, trial: int = 0) -> ErrorTrace:
    """Simulate one trajectory and run every selected algorithm on it.

    All algorithms consume the same truth trajectory and measurements.
    """
    streams = NoiseStreams.for_trial(seed, trial)
    u, n, lm = cfg.odometry(), cfg.noise(), cfg.landmark()
    steps, every = cfg.steps, cfg.obs_every
    names = list(cfg.algorithms)
    adapters = {name: ADAPTERS[name](cfg) for name in names}
    beliefs = {name: adapters[name].init() for name in names}
    theta_err = {name: np.full(steps + 1, np.nan) for name in names}
    pos_err = {name: np.full(steps + 1, np.nan) for name in names}
    failures: dict[str, str] = {}

    truth = Pose2(cfg.init_theta, cfg.init_x, cfg.init_y)
    for name in names:
        theta_err[name][0], pos_err[name][0] = _errors(adapters[name].estimate(beliefs[name]), truth)

    for k in range(1, steps + 1):
        truth = truth_step(truth, u, n, streams, cfg.heading_model)
        z = sense(truth, lm, n, streams) if k % every == 0 else None
        for name in names:
            if name in failures:
                continue
            ad = adapters[name]
            try:
                b = ad.predict(beliefs[name], u, n)
                if z is not None:
                    b = ad.observe(b, z, lm, n)
                theta_err[name][k], pos_err[name][k] = _errors(ad.estimate(b), truth)
                beliefs[name] = b
            except (LocsimError, ArithmeticError, ValueError, np.linalg.LinAlgError) as exc:
                failures[name] = f"step {k}: {type(exc).__name__}: {exc}"
                log.warning("trial %d: %s failed at %s", trial, name, failures[name])

    t = np.arange(steps + 1) * cfg.dt
    return ErrorTrace(t, theta_err, pos_err, failures)


@dataclass
class MonteCarloResult:
    cfg: TrialConfig
    seed: int
    t: np.ndarray
    theta_err: dict[str, np.ndarray]  # trials x (steps + 1)
    pos_err: dict[str, np.ndarray]
    failures: list[tuple[int, str, str]]

    def per_time(self, name: str) -> dict[str, np.ndarray]:
        """Mean and standard deviation across trials at every time step."""
        out = {}
        for key, arr in (("theta_err", self.theta_err[name]), ("pos_err", self.pos_err[name])):
            with warnings.catch_warnings():
                # all-NaN columns (every trial failed) stay NaN
                warnings.simplefilter("ignore", RuntimeWarning)
                out[key + "_mean"] = np.nanmean(arr, axis=0)
                out[key + "_std"] = np.nanstd(arr, axis=0)
        return out

    def window_mask(self) -> np.ndarray:
        return (self.t >= self.cfg.window_start - 1e-9) & (self.t <= self.cfg.window_end + 1e-9)

    def window_average(self, name: str) -> dict[str, float]:
        """Time averages over the metrics window of the per-time statistics."""
        stats = self.per_time(name)
        mask = self.window_mask()
        return {key: float(np.mean(val[mask])) for key, val in stats.items()}


def _trial_job(args):
    cfg, seed, trial = args
    return run_trial(cfg, seed, trial)


def run_monte_carlo(cfg: TrialConfig, trials: int | None = None, seed: int | None = None, workers: int = 1):
    """Run ``trials`` independent trials; results are independent of ``workers``."""
    trials = cfg.trials if trials is None else trials
    seed = cfg.seed if seed is None else seed
    jobs = [(cfg, seed, i) for i in range(trials)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            traces = list(pool.map(_trial_job, jobs))
    else:
        traces = [_trial_job(job) for job in jobs]
    names = list(cfg.algorithms)
    failures = [(i, name, reason) for i, tr in enumerate(traces) for name, reason in tr.failures.items()]
    return MonteCarloResult(
        cfg,
        seed,
        traces[0].t,
        {name: np.vstack([tr.theta_err[name] for tr in traces]) for name in names},
        {name: np.vstack([tr.pos_err[name] for tr in traces]) for name in names},
        failures,
    )


def _fmt(x: float) -> str:
    return f"{x:.9g}"


def write_outputs(result: MonteCarloResult, out_dir) -> list[Path]:
    """Write ``trace_<alg>.csv``, ``summary.txt`` and ``manifest.txt``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name in result.cfg.algorithms:
        stats = result.per_time(name)
        rows = [CSV_HEADER]
        for i, t in enumerate(result.t):
            rows.append(
                ",".join(
                    _fmt(v)
                    for v in (
                        t,
                        stats["theta_err_mean"][i],
                        stats["theta_err_std"][i],
                        stats["pos_err_mean"][i],
                        stats["pos_err_std"][i],
                    )
                )
            )
        path = out / f"trace_{name}.csv"
        path.write_text("\n".join(rows) + "\n")
        written.append(path)

    cfg = result.cfg
    trials = next(iter(result.pos_err.values())).shape[0]
    lines = [
        f"# time-averaged errors over t in [{_fmt(cfg.window_start)}, {_fmt(cfg.window_end)}] s",
        f"# trials = {trials}, seed = {result.seed}",
        "algorithm,theta_err_mean,theta_err_std,pos_err_mean,pos_err_std,failed_trials",
    ]
    for name in cfg.algorithms:
        avg = result.window_average(name)
        failed = sum(1 for _, alg, _ in result.failures if alg == name)
        lines.append(
            ",".join(
                [name]
                + [_fmt(avg[k]) for k in ("theta_err_mean", "theta_err_std", "pos_err_mean", "pos_err_std")]
                + [str(failed)]
            )
        )
    summary = out / "summary.txt"
    summary.write_text("\n".join(lines) + "\n")
    written.append(summary)

    manifest = out / "manifest.txt"
    body = [f"seed = {result.seed}", f"trials = {trials}", "", cfg.to_text().rstrip("\n")]
    if result.failures:
        body += ["", "# failures"] + [f"trial {i} {name}: {reason}" for i, name, reason in result.failures]
    manifest.write_text("\n".join(body) + "\n")
    written.append(manifest)
    return written
