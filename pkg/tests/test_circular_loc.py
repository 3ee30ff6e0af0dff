import math
import time

import numpy as np
import pytest

from locsim import circular_loc as cl
from locsim.circstats import VonMises, a_func, wrap
from locsim.errors import DomainError, NoInformationError
from locsim.model import Landmark, NoiseParams, OdometryInput
from locsim.oracles import scripted_circular_step

BANK = cl.ModuleBank.geometric(2.5, 1.5, 4)
BENCH = NoiseParams()
U = OdometryInput(0.2, 0.1, 0.02)
LM = Landmark(2.0, 3.0)
RES = cl.DEFAULT_RESOLUTION

# scripted arithmetic with quadrature A (oracles.scripted_circular_step), frozen
PHASE_KAPPA_AFTER_TIME = (15.8254563518, 35.6067518501, 80.1146788523, 180.25751931)
PHASE_AFTER_OBS = (0.00503226408253, 0.00335484610045, 0.00223656506609, 0.0014910436732)
PHASE_KAPPA_AFTER_OBS = (15.8376319488, 35.6341592315, 80.17635775, 180.39630912)


def uniform_belief(x, y, kappa=50.0, bank=BANK):
    phi, psi = cl.encode(x, y, bank)
    return cl.CircularBelief(
        VonMises(0.0, 100.0),
        tuple(VonMises(p, kappa) for p in phi),
        tuple(VonMises(p, kappa) for p in psi),
        bank,
    )


# --- bank and belief ---------------------------------------------------------


def test_module_bank():
    assert BANK.lambdas == (2.5, 3.75, 5.625, 8.4375)
    assert math.isclose(BANK.common_period, 67.5)
    for bad in ((), (2.0, 1.0), (1.0, 2.0, 3.0), (-1.0, -1.5)):
        with pytest.raises(DomainError):
            cl.ModuleBank(bad)


def test_coverage_limited_by_common_period():
    single = cl.ModuleBank((2.5,))
    with pytest.raises(DomainError):
        cl.CircularBelief.at(0.0, 0.0, 0.0, 1.0, 0.01, single)
    cl.CircularBelief.at(0.0, 0.0, 0.0, 1.0, 0.01, single, (-1.25, 1.25), (-1.25, 1.25))


def test_phase_kappa_table():
    # kappa = lambda^2 / (4 pi^2 variance)
    table = [(2.5, 0.01, 15.831434944115277), (2.5, 4e-4 * 1.01e-2, 39186.7201587), (8.4375, 1.0, 1.8033)]
    for lam, var, want in table:
        assert math.isclose(cl.phase_kappa(lam, var), lam * lam / (4 * math.pi**2 * var), rel_tol=1e-15)
        assert math.isclose(cl.phase_kappa(lam, var), want, rel_tol=1e-4)
    assert cl.phase_kappa(1.0, 0.0) == math.inf


def test_position_variance_proxy():
    b = cl.CircularBelief.at(0.0, 0.0, 0.0, 1.0, 0.01, BANK)
    b = cl.CircularBelief(b.heading, b.phi[:-1] + (VonMises(0.0, 100.0),), b.psi[:-1] + (VonMises(0.0, 100.0),), BANK)
    assert math.isclose(b.position_variance(), 0.01)
    b = cl.CircularBelief(b.heading, b.phi, b.psi[:-1] + (VonMises(0.0, 50.0),), BANK)
    assert math.isclose(b.position_variance(), 0.02)


# --- encode ------------------------------------------------------------------


def test_encode_examples():
    phi, psi = cl.encode(0.0, 0.0, BANK)
    assert phi == [0.0] * 4 and psi == [0.0] * 4
    phi, _ = cl.encode(2.5, 0.0, BANK)
    assert abs(wrap(phi[0])) < 1e-12
    assert math.isclose(phi[1], wrap(2 * math.pi / 1.5), rel_tol=1e-14)
    phi, _ = cl.encode(1.0, 0.0, BANK)
    assert phi == [wrap(2 * math.pi / lam) for lam in BANK.lambdas]
    with pytest.raises(DomainError):
        cl.encode(5.1, 0.0, BANK)


# --- time update -------------------------------------------------------------


def test_time_update_heading_zero_keeps_psi():
    b = cl.time_update(cl.CircularBelief.at(0.0, 0.3, -0.2, 100.0, 0.01, BANK), U, BENCH)
    _, psi0 = cl.encode(0.3, -0.2, BANK)
    assert [p.mu for p in b.psi] == psi0


def test_time_update_process_concentration():
    b0 = cl.CircularBelief.at(0.0, 0.0, 0.0, 100.0, 0.01, BANK)
    b = cl.time_update(b0, U, BENCH)
    kw1 = 2.5**2 / (4 * math.pi**2 * 4e-4 * (1e-4 + 0.01))
    assert math.isclose(kw1, 39186.7201587, rel_tol=1e-10)
    for p, want in zip(b.phi, PHASE_KAPPA_AFTER_TIME):
        assert math.isclose(p.kappa, want, rel_tol=1e-9)


def test_time_update_advance_scales_with_inverse_lambda():
    b = cl.time_update(cl.CircularBelief.at(0.5, 0.0, 0.0, 100.0, 0.01, BANK), U, BENCH)
    step = 0.1 * a_func(100.0) * 0.02
    for lam, p, q in zip(BANK.lambdas, b.phi, b.psi):
        assert math.isclose(p.mu, 2 * math.pi * step * math.cos(0.5) / lam, rel_tol=1e-12)
        assert math.isclose(q.mu, 2 * math.pi * step * math.sin(0.5) / lam, rel_tol=1e-12)
    assert math.isclose(b.phi[0].mu / b.phi[1].mu, 1.5, rel_tol=1e-12)


def test_process_concentration_grows_with_lambda():
    kws = [cl.phase_kappa(lam, 4e-4 * 1.01e-2) for lam in BANK.lambdas]
    assert all(b > a for a, b in zip(kws, kws[1:]))


# --- direct observation ------------------------------------------------------


def test_obsv_direct_consistent_observation():
    b = cl.CircularBelief.at(0.0, 1.0, -0.5, 100.0, 0.05, BANK)
    n = NoiseParams(sigma2_ox=0.01, sigma2_oy=0.01)
    out = cl.obsv_direct(b, 0.0, 1.0, -0.5, n)
    for before, after, lam in zip(b.phi, out.phi, BANK.lambdas):
        assert math.isclose(after.mu, before.mu, abs_tol=1e-14)
        assert math.isclose(after.kappa, before.kappa + cl.phase_kappa(lam, 0.01), rel_tol=1e-13)
    assert math.isclose(cl.phase_kappa(2.5, 0.01), 15.83, rel_tol=1e-3)


def test_obsv_direct_uninformative():
    b = cl.CircularBelief.at(0.0, 1.0, -0.5, 100.0, 0.05, BANK)
    n = NoiseParams(kappa_nu_theta=1e-12, sigma2_ox=1e14, sigma2_oy=1e14)
    out = cl.obsv_direct(b, 2.0, -3.0, 4.0, n)
    for before, after in zip(b.phi + b.psi, out.phi + out.psi):
        assert abs(after.mu - before.mu) < 1e-6 and abs(after.kappa - before.kappa) < 1e-6


# --- bearing/distance observation ------------------------------------------


def test_one_step_from_origin_matches_script():
    ref = scripted_circular_step()
    b = cl.time_update(cl.CircularBelief.at(0.0, 0.0, 0.0, 100.0, 0.01, BANK), U, BENCH)
    out = cl.obsv_bearing_distance(b, LM, ref["s_b"], ref["s_r"], BENCH)
    for p, mu, kappa in zip(out.phi, PHASE_AFTER_OBS, PHASE_KAPPA_AFTER_OBS):
        assert math.isclose(p.mu, mu, rel_tol=1e-8)
        assert math.isclose(p.kappa, kappa, rel_tol=1e-9)


def test_zero_noise_update_recovers_true_position():
    n = NoiseParams(sigma_omega2=0.0, sigma_v2=0.0, kappa_b=math.inf, sigma_r2=0.0)
    theta, x, y = 0.6, 1.3, -0.7
    b = cl.CircularBelief.at(theta, x, y, 1e9, 1e-9, BANK)
    s_b = wrap(math.atan2(LM.y - y, LM.x - x) - theta)
    s_r = math.hypot(LM.x - x, LM.y - y)
    out = cl.obsv_bearing_distance(b, LM, s_b, s_r, n)
    assert abs(cl.readout(out, "x") - x) <= RES
    assert abs(cl.readout(out, "y") - y) <= RES
    assert abs(wrap(out.heading.mu - theta)) < 1e-6


def test_heading_replaced_using_variance_proxy():
    b1 = cl.CircularBelief.at(0.0, 0.4, 0.1, 60.0, 0.01, BANK)
    b2 = cl.CircularBelief.at(-2.0, 0.4, 0.1, 60.0, 0.01, BANK)
    o1 = cl.obsv_bearing_distance(b1, LM, 0.2, 3.3, BENCH)
    o2 = cl.obsv_bearing_distance(b2, LM, 0.2, 3.3, BENCH)
    assert o1.heading == o2.heading


# --- readout -----------------------------------------------------------------


def test_readout_roundtrip_one():
    b = uniform_belief(1.0, -2.0)
    assert abs(cl.readout(b, "x") - 1.0) <= RES
    assert abs(cl.readout(b, "y") + 2.0) <= RES


def test_readout_origin():
    b = uniform_belief(0.0, 0.0)
    assert cl.readout(b, "x") == 0.0


def test_readout_tie_break_single_module():
    # maxima at -5, -2.5, 0, 2.5, 5: the smallest |x| wins
    assert cl.decode([0.0], [1.0], (2.5,), (-5.0, 5.0)) == 0.0
    # symmetric pair of maxima at -1.25 and 1.25: the smaller x wins
    assert math.isclose(cl.decode([math.pi], [1.0], (2.5,), (-2.0, 2.0)), -1.25, abs_tol=1e-6)


def test_readout_errors():
    b = uniform_belief(0.0, 0.0, kappa=0.0)
    with pytest.raises(NoInformationError):
        cl.readout(b, "x")
    with pytest.raises(DomainError):
        cl.readout(uniform_belief(0.0, 0.0), "z")
    with pytest.raises(DomainError):
        cl.readout(uniform_belief(0.0, 0.0), "x", resolution=0.0)


def test_readout_roundtrip_random():
    rng = np.random.default_rng(3)
    for x in rng.uniform(-5.0, 5.0, 200):
        kappa = rng.uniform(10.0, 500.0)
        phi, _ = cl.encode(x, 0.0, BANK)
        assert abs(cl.decode(phi, [kappa] * 4, BANK.lambdas, (-5.0, 5.0)) - x) <= RES


def test_readout_tracks_common_displacement():
    rng = np.random.default_rng(5)
    for _ in range(50):
        x0, d = rng.uniform(-4.0, 4.0), rng.uniform(-1.0, 1.0)
        phi, _ = cl.encode(x0, 0.0, BANK)
        moved = [wrap(p + 2 * math.pi * d / lam) for p, lam in zip(phi, BANK.lambdas)]
        before = cl.decode(phi, [40.0] * 4, BANK.lambdas, (-5.0, 5.0))
        after = cl.decode(moved, [40.0] * 4, BANK.lambdas, (-5.0, 5.0))
        if -5.0 <= x0 + d <= 5.0:
            assert abs((after - before) - d) <= RES


def test_readout_score_vectorized():
    xs = np.linspace(-5, 5, 11)
    means, kappas = [0.3, -1.0, 2.0, 0.1], [1.0, 2.0, 3.0, 4.0]
    got = cl.readout_score(xs, means, kappas, BANK.lambdas)
    for x, g in zip(xs, got):
        want = sum(k * math.cos(2 * math.pi * x / lam - m) for m, k, lam in zip(means, kappas, BANK.lambdas))
        assert math.isclose(g, want, rel_tol=1e-12, abs_tol=1e-12)


def test_readout_runtime():
    rng = np.random.default_rng(0)
    xs = rng.uniform(-5.0, 5.0, 1000)
    start = time.perf_counter()
    for x in xs:
        phi, _ = cl.encode(x, 0.0, BANK)
        cl.decode(phi, [50.0] * 4, BANK.lambdas, (-5.0, 5.0))
    assert time.perf_counter() - start < 10.0
