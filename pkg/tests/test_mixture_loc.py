import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from locsim import mixture_loc as ml
from locsim.circstats import VonMises, a_func, kappa_of_sum
from locsim.errors import DomainError, GeometryError
from locsim.model import Landmark, NoiseParams, OdometryInput
from locsim.oracles import scripted_mixture_step
from locsim.scalar_filters import KfState

BENCH = NoiseParams()
U = OdometryInput(0.2, 0.1, 0.02)
LM = Landmark(2.0, 3.0)

# scripted arithmetic with quadrature A (oracles.scripted_mixture_step), frozen
STEP = dict(
    kappa_after_time=71.634340232,
    x=0.00200227788509,
    y=1.84615998218e-05,
    var=0.00999634272383,
    theta=0.00399768505955,
    kappa=282.729968069,
)


def test_belief_at():
    b = ml.MixtureBelief.at(0.1, 1.0, 2.0, 50.0, 0.3)
    assert b.heading == VonMises(0.1, 50.0)
    assert b.x == KfState(1.0, 0.3) and b.y == KfState(2.0, 0.3)


# --- time update -------------------------------------------------------------


def test_time_update_near_deterministic_heading():
    n = NoiseParams(sigma_v2=0.0)
    b = ml.time_update(ml.MixtureBelief.at(0.0, 0.0, 0.0, 1e10, 0.01), U, n)
    assert math.isclose(b.x.mean, 0.002, rel_tol=1e-9)
    assert b.y.mean == 0.0
    # sigma_v = 0 still inflates by v^2 dt^2 = 0.01 * 4e-4
    assert math.isclose(b.x.var, 0.01 + 0.01 * 4e-4, rel_tol=1e-14)


def test_time_update_uses_resultant_length():
    b = ml.time_update(ml.MixtureBelief.at(math.pi / 4, 0.0, 0.0, 250.0, 0.01), U, BENCH)
    assert math.isclose(b.x.mean, 0.002 * a_func(250.0) * math.cos(math.pi / 4), rel_tol=1e-14)
    assert math.isclose(b.y.mean, 0.002 * a_func(250.0) * math.sin(math.pi / 4), rel_tol=1e-14)


def test_time_update_heading_follows_vmf():
    b = ml.time_update(ml.MixtureBelief.at(0.0, 0.0, 0.0, 100.0, 0.01), U, BENCH)
    assert math.isclose(b.heading.mu, 0.004, rel_tol=1e-14)
    assert math.isclose(b.heading.kappa, kappa_of_sum(100.0, 250.0), rel_tol=1e-14)
    assert math.isclose(b.heading.kappa, STEP["kappa_after_time"], rel_tol=1e-9)


@settings(max_examples=50, deadline=None)
@given(st.floats(-3, 3), st.floats(0.1, 1e4), st.floats(1e-4, 1.0), st.floats(0.0, 2.0), st.floats(-1, 1))
def test_time_update_variance_increment(theta, kappa, var, v, omega):
    u = OdometryInput(omega, v, 0.02)
    b = ml.time_update(ml.MixtureBelief.at(theta, 0.0, 0.0, kappa, var), u, BENCH)
    inc = (BENCH.sigma_v2 + v * v) * 0.02**2
    assert math.isclose(b.x.var, var + inc, rel_tol=1e-14)
    assert b.x.var == b.y.var


def test_position_increment_moments_monte_carlo():
    rng = np.random.default_rng(8)
    n = 10**6
    for _ in range(5):
        v, sv2 = rng.uniform(0.05, 2.0), rng.uniform(1e-4, 0.1)
        heading = VonMises(rng.uniform(-math.pi, math.pi), rng.uniform(0.5, 300.0))
        mc, ms, bound = ml.position_increment_moments(v, sv2, heading)
        th = rng.vonmises(heading.mu, heading.kappa, n)
        speed = v + rng.normal(0.0, math.sqrt(sv2), n)
        for mean, samples in ((mc, speed * np.cos(th)), (ms, speed * np.sin(th))):
            assert abs(samples.mean() - mean) < 3 * samples.std(ddof=1) / math.sqrt(n)
            assert samples.var(ddof=1) <= bound


# --- direct observation ------------------------------------------------------


def test_obsv_direct_at_mean_tightens():
    b = ml.MixtureBelief.at(0.3, 1.0, -1.0, 5.0, 0.2)
    out = ml.obsv_direct(b, 0.3, 1.0, -1.0, BENCH)
    assert math.isclose(out.heading.mu, 0.3) and out.x.mean == 1.0 and out.y.mean == -1.0
    assert out.heading.kappa > 5.0 and out.x.var < 0.2 and out.x.var == out.y.var


def test_obsv_direct_uninformative_heading():
    n = NoiseParams(kappa_nu_theta=1e-9)
    out = ml.obsv_direct(ml.MixtureBelief.at(0.3, 0.0, 0.0, 5.0, 0.2), 2.0, 0.0, 0.0, n)
    assert abs(out.heading.mu - 0.3) < 1e-6 and abs(out.heading.kappa - 5.0) < 1e-6


def test_obsv_direct_closed_form():
    n = NoiseParams(kappa_nu_theta=2.0, sigma2_ox=1.0, sigma2_oy=1.0)
    out = ml.obsv_direct(ml.MixtureBelief.at(0.0, 0.0, 0.0, 2.0, 1.0), math.pi / 2, 1.0, 0.0, n)
    assert math.isclose(out.heading.mu, math.pi / 4) and math.isclose(out.heading.kappa, 2 * math.sqrt(2))
    assert out.x == KfState(0.5, 0.5)


# --- bearing/distance observation ------------------------------------------


def test_equivalent_orientation_benchmark_geometry():
    b = ml.MixtureBelief.at(0.0, 0.0, 0.0, 100.0, 0.02)
    h = ml.equivalent_orientation(b, LM, 0.0, math.sqrt(13.0), BENCH)
    assert math.isclose(h.mu, math.atan2(3.0, 2.0), rel_tol=1e-15)
    assert math.isclose(h.mu, 0.98279372324732, rel_tol=1e-12)
    # kappa_1 = r_bar s_r / (2 var) = 13 / 0.04 = 325, then the convolution rule with kappa_b
    assert math.isclose(h.kappa, kappa_of_sum(325.0, 500.0), rel_tol=1e-13)
    assert h.kappa < 325.0


def test_equivalent_orientation_literal_flag():
    b = ml.MixtureBelief.at(0.0, 0.0, 0.0, 100.0, 0.02)
    h = ml.equivalent_orientation(b, LM, 0.0, math.sqrt(13.0), BENCH, literal=True)
    assert math.isclose(h.kappa, a_func(325.0) * a_func(500.0), rel_tol=1e-13)


def test_equivalent_orientation_noiseless_limit():
    n = NoiseParams(kappa_b=math.inf)
    b = ml.MixtureBelief.at(0.0, 0.5, 0.5, 100.0, 1e-12)
    h = ml.equivalent_orientation(b, LM, 0.4, math.hypot(1.5, 2.5), n)
    assert math.isclose(h.mu, math.atan2(2.5, 1.5) - 0.4, rel_tol=1e-14)
    assert h.kappa > 1e12


def test_equivalent_orientation_geometry_errors():
    with pytest.raises(GeometryError):
        ml.equivalent_orientation(ml.MixtureBelief.at(0.0, 2.0, 3.0, 1.0, 0.1), LM, 0.0, 1.0, BENCH)
    with pytest.raises(DomainError):
        ml.equivalent_orientation(ml.MixtureBelief.at(0.0, 0.0, 0.0, 1.0, 0.1), LM, 0.0, 0.0, BENCH)


def test_equivalent_position_zero_noise_is_exact():
    n = NoiseParams(kappa_b=math.inf, sigma_r2=0.0)
    theta, x, y = 0.7, 0.3, -0.4
    s_b = math.atan2(LM.y - y, LM.x - x) - theta
    s_r = math.hypot(LM.x - x, LM.y - y)
    o_x, o_y, var = ml.equivalent_position(VonMises(theta, 1e12), LM, s_b, s_r, n)
    assert abs(o_x - x) < 1e-9 and abs(o_y - y) < 1e-9
    assert var == s_r * s_r


def test_heading_replaced_not_fused():
    b1 = ml.MixtureBelief.at(0.0, 0.1, 0.2, 40.0, 0.01)
    b2 = ml.MixtureBelief.at(2.5, 0.1, 0.2, 40.0, 0.01)
    o1 = ml.obsv_bearing_distance(b1, LM, 0.3, 3.4, BENCH)
    o2 = ml.obsv_bearing_distance(b2, LM, 0.3, 3.4, BENCH)
    assert o1.heading == o2.heading
    assert math.isclose(o1.heading.mu, math.atan2(3.0 - 0.2, 2.0 - 0.1) - 0.3, rel_tol=1e-14)
    # the position update does depend on the prior heading
    assert o1.x.mean != o2.x.mean


def test_position_update_uses_prior_heading_and_inflated_variance():
    b = ml.MixtureBelief.at(0.4, 0.1, 0.2, 40.0, 0.01)
    s_b, s_r = 0.3, 3.4
    out = ml.obsv_bearing_distance(b, LM, s_b, s_r, BENCH)
    scale = s_r * a_func(40.0) * a_func(500.0)
    o_x = 2.0 - scale * math.cos(0.4 + s_b)
    var_r = BENCH.sigma_r2 + s_r**2
    gain = 0.01 / (0.01 + var_r)
    assert math.isclose(out.x.mean, 0.1 + gain * (o_x - 0.1), rel_tol=1e-14)
    assert math.isclose(out.x.var, 1 / (1 / 0.01 + 1 / var_r), rel_tol=1e-14)
    assert out.x.var == out.y.var


def test_one_step_from_origin_matches_script():
    b = ml.time_update(ml.MixtureBelief.at(0.0, 0.0, 0.0, 100.0, 0.01), U, BENCH)
    ref = scripted_mixture_step()
    out = ml.obsv_bearing_distance(b, LM, ref["s_b"], ref["s_r"], BENCH)
    assert math.isclose(out.x.mean, STEP["x"], rel_tol=1e-9)
    assert math.isclose(out.y.mean, STEP["y"], rel_tol=1e-9)
    assert math.isclose(out.x.var, STEP["var"], rel_tol=1e-11)
    assert math.isclose(out.heading.mu, STEP["theta"], rel_tol=1e-9)
    assert math.isclose(out.heading.kappa, STEP["kappa"], rel_tol=1e-9)


# --- block domination --------------------------------------------------------


def test_pd_domination_examples():
    assert np.allclose(ml.pd_domination(np.eye(2), 0.5), 2 * np.eye(2))
    P = np.array([[1.0, 0.9], [0.9, 1.0]])
    Pp = ml.pd_domination(P, 0.5)
    assert np.allclose(Pp, 2 * np.eye(2))
    assert math.isclose(np.linalg.eigvalsh(Pp - P).min(), 0.1, rel_tol=1e-12)


def test_pd_domination_random():
    rng = np.random.default_rng(12)
    for _ in range(200):
        L = rng.normal(size=(2, 2))
        P = L @ L.T + 1e-3 * np.eye(2)
        c = rng.uniform(0.05, 0.95)
        assert np.linalg.eigvalsh(ml.pd_domination(P, c) - P).min() > 0


def test_pd_domination_rejects_bad_input():
    with pytest.raises(DomainError):
        ml.pd_domination(np.array([[1.0, 2.0], [2.0, 1.0]]))
    with pytest.raises(DomainError):
        ml.pd_domination(np.array([[1.0, 0.1], [0.0, 1.0]]))
    with pytest.raises(DomainError):
        ml.pd_domination(np.eye(2), 1.0)
