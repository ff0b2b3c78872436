import dataclasses
import math
import warnings

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from lambert3b.errors import (
    DegenerateOrbitError,
    DomainError,
    ScenarioError,
    SingularityError,
    SmallMassRatioWarning,
    SolvabilityError,
)
from lambert3b.lambert_w import Branch
from lambert3b.oracle import IntegratorConfig, integrate_two_body
from lambert3b.two_body import (
    ScenarioConfig,
    check_validity,
    conic_radius,
    derive_constants,
    fit_conic_constants,
    implicit_residual,
    r1_dot_of_t,
    r1_of_t,
    r2_dot_of_t,
    r2_of_t,
    r_dot_of_t,
    r_of_t,
    theta1_of_t,
    theta2_of_t,
    theta_dot_of_t,
)

from conftest import load
from oracles import implicit_radius, quadrature_primary


def _scenario(**over):
    base = dict(m1=2e24, m2=1e24, m3=1e3, r1o=1e9 / 3, r2o=2e9 / 3, rdot1o=1000.0, rdot2o=2000.0,
                theta1o=0.3, theta2o=0.3 + math.pi, thetadot_o=1e-8, t_end=1e6, dt_out=1e4)
    base.update(over)
    return ScenarioConfig(**base)


class TestScenarioConfig:
    def test_sample_grid(self, pinned):
        cfg = pinned[0]
        t = cfg.sample_times()
        assert t.size == 101
        assert t[0] == 0.0 and t[-1] == pytest.approx(1e6, rel=1e-15)

    def test_short_horizon_keeps_only_t0(self):
        cfg, _ = load("zero_horizon")
        np.testing.assert_array_equal(cfg.sample_times(), [0.0])

    @pytest.mark.parametrize("over", [
        dict(m1=-1.0), dict(r2o=0.0), dict(dt_out=0.0), dict(t_end=0.0),
        dict(theta2o=0.3), dict(m3="light"), dict(G=math.nan),
    ])
    def test_rejects_bad_values(self, over):
        with pytest.raises(ScenarioError):
            _scenario(**over)

    def test_heavy_third_body_warns(self):
        with pytest.warns(SmallMassRatioWarning):
            _scenario(m3=1e23)


class TestDerivedConstants:
    def test_pinned_values(self, pinned):
        cfg, _, dc = pinned
        A = 2 * cfg.G * 3e24
        B = 3000.0 ** 2 - A / 1e9
        assert dc.A == pytest.approx(A, rel=1e-15)
        assert dc.B == pytest.approx(B, rel=1e-15)
        assert dc.kk == pytest.approx(A / (2 * B), rel=1e-15)
        assert dc.sigma == 1 and dc.branch is Branch.LOWER
        assert -dc.kk * dc.w0 == pytest.approx(cfg.r_o, rel=1e-12)
        assert dc.c5 == -dc.c2

    def test_bound_scenario_names_b(self):
        cfg, _ = load("bound")
        with pytest.raises(SolvabilityError, match="B"):
            derive_constants(cfg)

    def test_infall_through_branch_point_is_rejected(self):
        # approaching primaries reach r = k, where the Lambert argument hits -1/e
        with pytest.raises(DomainError):
            derive_constants(_scenario(rdot1o=-1000.0, rdot2o=-2000.0, t_end=1e7))

    def test_short_infall_runs_on_lower_branch(self):
        cfg = _scenario(rdot1o=-1000.0, rdot2o=-2000.0, t_end=1e5)
        dc = derive_constants(cfg)
        assert dc.sigma == -1
        r = r_of_t(dc, np.linspace(0, 1e5, 11))
        assert np.all(np.diff(r) < 0)
        assert r[0] == pytest.approx(cfg.r_o, rel=1e-12)


@pytest.mark.parametrize("name", ["pinned", "deep_escape"])
def test_closed_form_matches_quadrature(name):
    cfg, _ = load(name)
    dc = derive_constants(cfg)
    for t in (1e4, 2.5e5, 1e6):
        r_ref = implicit_radius(dc, t)
        r1_ref, dtheta = quadrature_primary(dc, cfg, t, which=1)
        r2_ref, _ = quadrature_primary(dc, cfg, t, which=2)
        assert r_of_t(dc, t) == pytest.approx(r_ref, rel=1e-12)
        assert r1_of_t(dc, cfg, t) == pytest.approx(r1_ref, rel=1e-12)
        assert r2_of_t(dc, cfg, t) == pytest.approx(r2_ref, rel=1e-12)
        assert theta1_of_t(dc, cfg, t) - cfg.theta1o == pytest.approx(dtheta, rel=1e-11)


def test_implicit_residual_on_pinned(pinned):
    cfg, _, dc = pinned
    t = np.linspace(cfg.t0, cfg.t_end, 1000)
    assert implicit_residual(dc, t).max() <= 1e-9


def test_initial_values_reproduced(pinned):
    cfg, _, dc = pinned
    t0 = cfg.t0
    assert r_of_t(dc, t0) == pytest.approx(cfg.r_o, rel=1e-12)
    assert r1_of_t(dc, cfg, t0) == cfg.r1o
    assert r2_of_t(dc, cfg, t0) == cfg.r2o
    assert theta1_of_t(dc, cfg, t0) == cfg.theta1o
    assert theta2_of_t(dc, cfg, t0) == cfg.theta2o
    assert r1_dot_of_t(dc, t0) == pytest.approx(cfg.rdot1o, rel=1e-13)
    assert r2_dot_of_t(dc, t0) == pytest.approx(cfg.rdot2o, rel=1e-13)
    assert theta_dot_of_t(dc, t0) == pytest.approx(cfg.thetadot_o, rel=1e-12)


def test_lambert_rate_differs_from_initial_rate_at_second_order(pinned):
    # the Lambert radius obeys r' = sqrt(B) / (1 - k/r), which truncates the
    # energy relation; at t0 the two rates differ by about 1.5 (k/r)^2
    cfg, _, dc = pinned
    u = dc.kk / cfg.r_o
    mismatch = abs(r_dot_of_t(dc, cfg.t0) - cfg.rdot_o) / cfg.rdot_o
    assert mismatch == pytest.approx(1.5 * u * u, rel=0.1)


def test_chain_rule_rate(pinned):
    cfg, _, dc = pinned
    t, h = 4e5, 1.0
    fd = (r_of_t(dc, t + h) - r_of_t(dc, t - h)) / (2 * h)
    assert r_dot_of_t(dc, t) == pytest.approx(fd, rel=1e-8)
    fd_theta = (theta1_of_t(dc, cfg, t + h) - theta1_of_t(dc, cfg, t - h)) / (2 * h)
    assert theta_dot_of_t(dc, t) == pytest.approx(fd_theta, rel=1e-6)


def test_angle_rigidity(pinned):
    cfg, _, dc = pinned
    t = cfg.sample_times()
    gap = theta2_of_t(dc, cfg, t) - theta1_of_t(dc, cfg, t)
    assert np.max(np.abs(gap - (cfg.theta2o - cfg.theta1o))) <= 1e-12


def test_centre_of_mass_proportionality(pinned):
    cfg, _, dc = pinned
    t = np.linspace(cfg.t0, cfg.t_end, 200)
    lhs = cfg.m1 * r1_of_t(dc, cfg, t)
    rhs = cfg.m2 * r2_of_t(dc, cfg, t)
    assert np.max(np.abs(lhs - rhs) / lhs) <= 1e-12


def test_additivity_exact_when_binomial_margin_is_tiny(deep):
    cfg, _, dc = deep
    t = np.linspace(cfg.t0, cfg.t_end, 200)
    r = r_of_t(dc, t)
    assert np.max(np.abs(r1_of_t(dc, cfg, t) + r2_of_t(dc, cfg, t) - r) / r) <= 1e-9


def test_additivity_gap_is_second_order(pinned):
    cfg, _, dc = pinned
    t = np.linspace(cfg.t0, cfg.t_end, 200)
    r = r_of_t(dc, t)
    gap = np.abs(r1_of_t(dc, cfg, t) + r2_of_t(dc, cfg, t) - r) / r
    u0 = dc.kk / cfg.r_o
    assert gap.max() <= 10 * u0 ** 2
    assert gap.max() > 1e-6  # a real, documented discrepancy


@pytest.mark.parametrize("name, tol", [("deep_escape", 1e-8), ("pinned", None)])
def test_energy_identity(name, tol):
    cfg, _ = load(name)
    dc = derive_constants(cfg)
    t = np.linspace(cfg.t0, cfg.t_end, 200)
    r = r_of_t(dc, t)
    rdot = r1_dot_of_t(dc, t) + r2_dot_of_t(dc, t)
    err = np.abs(rdot ** 2 - (dc.A / r + dc.B)) / (dc.A / r + dc.B)
    u0 = dc.kk / cfg.r_o
    assert err.max() <= (tol if tol is not None else 3 * u0 ** 2)


class TestValidity:
    def test_pinned_passes(self, pinned):
        cfg, _, dc = pinned
        rep = check_validity(cfg, dc)
        assert rep.overall and rep.b_positive and rep.theta_rate_ok and rep.radius_ok
        assert rep.binomial_margin == pytest.approx(dc.A / (dc.B * cfg.r_o), rel=1e-12)
        assert rep.binomial_margin <= 0.1

    def test_fast_spin(self):
        cfg, _ = load("fast_spin")
        rep = check_validity(cfg, derive_constants(cfg))
        assert not rep.theta_rate_ok and not rep.overall

    def test_near_threshold(self):
        cfg, _ = load("near_threshold")
        rep = check_validity(cfg, derive_constants(cfg))
        assert not rep.radius_ok and not rep.overall


escape_speed = st.floats(min_value=1.05, max_value=20.0)


@settings(max_examples=40, deadline=None)
@given(
    speed_factor=escape_speed,
    mass_ratio=st.floats(min_value=0.05, max_value=1.0),
    theta=st.floats(min_value=-math.pi, max_value=math.pi),
    sign=st.sampled_from([1.0, -1.0]),
)
def test_random_escapes_keep_invariants(speed_factor, mass_ratio, theta, sign):
    G, M, ro = 6.674e-11, 3e24, 1e9
    m2 = M * mass_ratio / (1 + mass_ratio)
    m1 = M - m2
    v = sign * speed_factor * math.sqrt(2 * G * M / ro)
    cfg = ScenarioConfig(m1=m1, m2=m2, m3=1.0, r1o=ro * m2 / M, r2o=ro * m1 / M,
                         rdot1o=v * m2 / M, rdot2o=v * m1 / M, theta1o=theta,
                         theta2o=theta + math.pi, thetadot_o=1e-9, t_end=2e4, dt_out=1e3)
    try:
        dc = derive_constants(cfg)
    except DomainError:
        assume(False)
    t = np.linspace(cfg.t0, cfg.t_end, 50)
    assert implicit_residual(dc, t).max() <= 1e-9
    assert r_of_t(dc, cfg.t0) == pytest.approx(cfg.r_o, rel=1e-9)
    gap = theta2_of_t(dc, cfg, t) - theta1_of_t(dc, cfg, t)
    assert np.max(np.abs(gap - math.pi)) <= 1e-12
    np.testing.assert_allclose(m1 * r1_of_t(dc, cfg, t), m2 * r2_of_t(dc, cfg, t), rtol=1e-12)


class TestConic:
    def test_reproduces_initial_radius_and_slope(self, pinned):
        cfg = pinned[0]
        cc = fit_conic_constants(cfg)
        assert conic_radius(cc, cfg.theta2o) == pytest.approx(cfg.r_o, rel=1e-12)
        h = 1e-7
        slope = (conic_radius(cc, cfg.theta2o + h) - conic_radius(cc, cfg.theta2o - h)) / (2 * h)
        assert slope == pytest.approx(cfg.rdot_o / cfg.thetadot_o, rel=1e-5)

    def test_bound_orbit_matches_oracle(self):
        G, m1, m2, a = 6.674e-11, 5.972e24, 7.342e22, 3.844e8
        M = m1 + m2
        w = 0.9 * math.sqrt(G * M / a) / a
        cfg = ScenarioConfig(m1=m1, m2=m2, m3=1.0, r1o=a * m2 / M, r2o=a * m1 / M,
                             rdot1o=0.0, rdot2o=0.0, theta1o=0.0, theta2o=math.pi,
                             thetadot_o=w, t_end=1e6, dt_out=1e5)
        cc = fit_conic_constants(cfg)
        rel_pos = [-a, 0.0]  # m1 -> m2 at theta2o = pi
        traj = integrate_two_body(rel_pos, [0.0, -a * w], m1, m2, G, IntegratorConfig(rel_tol=1e-12),
                                  0.0, 1e6, 1e5)
        d = traj.pos[:, 1] - traj.pos[:, 0]
        np.testing.assert_allclose(conic_radius(cc, np.arctan2(d[:, 1], d[:, 0])), np.hypot(*d.T), rtol=1e-9)

    def test_zero_rate_is_degenerate(self):
        with pytest.raises(DegenerateOrbitError):
            fit_conic_constants(_scenario(thetadot_o=0.0))

    def test_hyperbola_beyond_asymptote(self, pinned):
        cc = fit_conic_constants(pinned[0])
        thetas = np.linspace(0, 2 * math.pi, 721)
        with pytest.raises(SingularityError):
            conic_radius(cc, thetas)

    def test_config_is_frozen(self, pinned):
        with pytest.raises(dataclasses.FrozenInstanceError):
            pinned[0].m1 = 1.0
