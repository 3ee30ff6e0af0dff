"""Gaussian localization baselines: a textbook EKF and an SE(2) LG-EKF.

Both track (theta, x, y) with a 3x3 covariance. The EKF linearizes the
unicycle and landmark models in world coordinates; the LG-EKF keeps its
mean on SE(2) with a left-multiplicative error S = S_hat exp(eps) and
a covariance on the Lie algebra, coordinates ordered (theta, rho_x, rho_y).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from locsim.circstats import wrap
from locsim.errors import GeometryError, NumericalError
from locsim.model import Landmark, NoiseParams, OdometryInput

EIG_FLOOR = 1e-12
_SMALL_ANGLE = 1e-6


def _clean_cov(P: np.ndarray) -> np.ndarray:
    """Symmetrize and floor the eigenvalues at EIG_FLOOR."""
    if not np.all(np.isfinite(P)):
        raise NumericalError("covariance became non-finite")
    P = 0.5 * (P + P.T)
    w, V = np.linalg.eigh(P)
    if w.min() >= EIG_FLOOR:
        return P
    w = np.maximum(w, EIG_FLOOR)
    return (V * w) @ V.T


def _rot(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


# --- SE(2) --------------------------------------------------------------------


def _v_matrix(theta: float) -> np.ndarray:
    if abs(theta) < _SMALL_ANGLE:
        a = 1.0 - theta * theta / 6.0
        b = theta / 2.0 - theta**3 / 24.0
    else:
        a = math.sin(theta) / theta
        b = (1.0 - math.cos(theta)) / theta
    return np.array([[a, -b], [b, a]])


def se2_exp(v) -> np.ndarray:
    """Homogeneous 3x3 matrix of the twist v = (theta, rho_x, rho_y)."""
    theta, rx, ry = (float(c) for c in v)
    g = np.eye(3)
    g[:2, :2] = _rot(theta)
    g[:2, 2] = _v_matrix(theta) @ np.array([rx, ry])
    return g


def se2_log(g) -> np.ndarray:
    """Twist coordinates (theta, rho_x, rho_y) of an SE(2) element."""
    g = np.asarray(g, dtype=float)
    theta = math.atan2(g[1, 0], g[0, 0])
    rho = np.linalg.solve(_v_matrix(theta), g[:2, 2])
    return np.array([theta, rho[0], rho[1]])


def se2_adjoint(g) -> np.ndarray:
    """Adjoint matrix of ``g`` acting on (theta, rho) coordinates."""
    g = np.asarray(g, dtype=float)
    ad = np.eye(3)
    ad[1:, 1:] = g[:2, :2]
    ad[1, 0] = g[1, 2]
    ad[2, 0] = -g[0, 2]
    return ad


def se2_right_jacobian(v) -> np.ndarray:
    """J_r(v) with exp(v + e) ~= exp(v) exp(J_r(v) e) for small e."""
    theta, rx, ry = (float(c) for c in v)
    if abs(theta) < _SMALL_ANGLE:
        a, b = 1.0 - theta * theta / 6.0, theta / 2.0 - theta**3 / 24.0
        c = -ry / 2.0 + rx * theta / 6.0
        d = rx / 2.0 + ry * theta / 6.0
    else:
        sn, cs, t2 = math.sin(theta), math.cos(theta), theta * theta
        a, b = sn / theta, (1.0 - cs) / theta
        c = (theta * rx - ry + ry * cs - rx * sn) / t2
        d = (rx + theta * ry - rx * cs - ry * sn) / t2
    return np.array([[1.0, 0.0, 0.0], [c, a, b], [d, -b, a]])


def se2_from_pose(theta: float, x: float, y: float) -> np.ndarray:
    g = np.eye(3)
    g[:2, :2] = _rot(theta)
    g[:2, 2] = (x, y)
    return g


def _reorthogonalize(g: np.ndarray) -> np.ndarray:
    theta = math.atan2(g[1, 0] - g[0, 1], g[0, 0] + g[1, 1])
    out = g.copy()
    out[:2, :2] = _rot(theta)
    out[2] = (0.0, 0.0, 1.0)
    return out


# --- shared models -----------------------------------------------------------


def measurement_model(pose, lm: Landmark) -> np.ndarray:
    """Noise-free (bearing, range) of the landmark seen from (theta, x, y)."""
    theta, x, y = pose
    dx, dy = lm.x - x, lm.y - y
    r = math.hypot(dx, dy)
    if r < 1e-12:
        raise GeometryError("pose coincides with the landmark")
    return np.array([wrap(math.atan2(dy, dx) - theta), r])


def measurement_jacobian(pose, lm: Landmark) -> np.ndarray:
    """d(bearing, range)/d(theta, x, y)."""
    theta, x, y = pose
    dx, dy = lm.x - x, lm.y - y
    q = dx * dx + dy * dy
    if q < 1e-24:
        raise GeometryError("pose coincides with the landmark")
    r = math.sqrt(q)
    return np.array([[-1.0, dy / q, -dx / q], [0.0, -dx / r, -dy / r]])


def measurement_cov(n: NoiseParams) -> np.ndarray:
    var_b = 0.0 if math.isinf(n.kappa_b) or n.kappa_b == 0.0 else 1.0 / n.kappa_b
    return np.diag([var_b, n.sigma_r2])


def motion_model(pose, u: OdometryInput) -> np.ndarray:
    """Noise-free Euler step of the unicycle."""
    theta, x, y = pose
    return np.array(
        [wrap(theta + u.omega * u.dt), x + u.v * math.cos(theta) * u.dt, y + u.v * math.sin(theta) * u.dt]
    )


def motion_jacobian(pose, u: OdometryInput) -> np.ndarray:
    theta = pose[0]
    return np.array(
        [
            [1.0, 0.0, 0.0],
            [-u.v * math.sin(theta) * u.dt, 1.0, 0.0],
            [u.v * math.cos(theta) * u.dt, 0.0, 1.0],
        ]
    )


def _kalman_correct(P, H, R, innov):
    S = H @ P @ H.T + R
    try:
        K = np.linalg.solve(S.T, (P @ H.T).T).T
    except np.linalg.LinAlgError as exc:
        raise NumericalError("singular innovation covariance") from exc
    if not np.all(np.isfinite(K)):
        raise NumericalError("non-finite Kalman gain")
    I_KH = np.eye(P.shape[0]) - K @ H
    P_new = I_KH @ P @ I_KH.T + K @ R @ K.T
    return K @ innov, P_new


# --- EKF ---------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class EkfBelief:
    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.array(self.mean, dtype=float)
        mean[0] = wrap(mean[0])
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", _clean_cov(np.array(self.cov, dtype=float)))

    @property
    def pose(self) -> tuple[float, float, float]:
        return float(self.mean[0]), float(self.mean[1]), float(self.mean[2])


def ekf_predict(b: EkfBelief, u: OdometryInput, n: NoiseParams) -> EkfBelief:
    theta = b.mean[0]
    F = motion_jacobian(b.mean, u)
    G = np.array([[u.dt, 0.0], [0.0, math.cos(theta) * u.dt], [0.0, math.sin(theta) * u.dt]])
    Q = G @ np.diag([n.sigma_omega2, n.sigma_v2]) @ G.T
    return EkfBelief(motion_model(b.mean, u), F @ b.cov @ F.T + Q)


def ekf_update(b: EkfBelief, z, lm: Landmark, n: NoiseParams) -> EkfBelief:
    """Correct with a measured (bearing, range) pair ``z``."""
    H = measurement_jacobian(b.mean, lm)
    pred = measurement_model(b.mean, lm)
    innov = np.array([wrap(z[0] - pred[0]), z[1] - pred[1]])
    delta, P = _kalman_correct(b.cov, H, measurement_cov(n), innov)
    return EkfBelief(b.mean + delta, P)


def ekf_step(b: EkfBelief, u: OdometryInput, obs, lm: Landmark, n: NoiseParams) -> EkfBelief:
    """Predict with ``u``, then correct with ``obs`` = (s_b, s_r) unless it is None."""
    b = ekf_predict(b, u, n)
    return b if obs is None else ekf_update(b, obs, lm, n)


# --- LG-EKF ------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SE2Belief:
    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "mean", _reorthogonalize(np.array(self.mean, dtype=float)))
        object.__setattr__(self, "cov", _clean_cov(np.array(self.cov, dtype=float)))

    @classmethod
    def at(cls, theta: float, x: float, y: float, cov) -> "SE2Belief":
        return cls(se2_from_pose(theta, x, y), cov)

    @property
    def pose(self) -> tuple[float, float, float]:
        g = self.mean
        return math.atan2(g[1, 0], g[0, 0]), float(g[0, 2]), float(g[1, 2])


def lgekf_predict(b: SE2Belief, u: OdometryInput, n: NoiseParams) -> SE2Belief:
    """Propagate along the body twist (omega dt, v dt, 0)."""
    xi = np.array([u.omega * u.dt, u.v * u.dt, 0.0])
    step = se2_exp(xi)
    F = se2_adjoint(se2_exp(-xi))
    Q = np.diag([n.sigma_omega2 * u.dt**2, n.sigma_v2 * u.dt**2, 0.0])
    return SE2Belief(b.mean @ step, F @ b.cov @ F.T + Q)


def lgekf_update(b: SE2Belief, z, lm: Landmark, n: NoiseParams) -> SE2Belief:
    pose = b.pose
    J = np.eye(3)
    J[1:, 1:] = b.mean[:2, :2]
    H = measurement_jacobian(pose, lm) @ J
    pred = measurement_model(pose, lm)
    innov = np.array([wrap(z[0] - pred[0]), z[1] - pred[1]])
    delta, P = _kalman_correct(b.cov, H, measurement_cov(n), innov)
    # re-express the posterior error about the moved mean
    Jr = se2_right_jacobian(delta)
    return SE2Belief(b.mean @ se2_exp(delta), Jr @ P @ Jr.T)


def lgekf_step(b: SE2Belief, u: OdometryInput, obs, lm: Landmark, n: NoiseParams) -> SE2Belief:
    b = lgekf_predict(b, u, n)
    return b if obs is None else lgekf_update(b, obs, lm, n)
