import math
import warnings

import numpy as np
import pytest

from lambert3b.errors import BranchJumpWarning, DegenerateError
from lambert3b.oracle import CartesianState, IntegratorConfig, integrate, polar_force_terms, polar_to_cartesian
from lambert3b.third_body import (
    PrimaryDerivatives,
    ThirdBodyIntermediates,
    angle_relation_residual,
    f_functions,
    m12_derivatives,
    polar_equation_residuals,
    quadratic_r3_roots,
    r3_from_intermediates,
    r3_of_t,
    theta3_from_f,
    theta3_of_t,
    third_body_trajectory,
)
from lambert3b.two_body import r_of_t, theta1_of_t

G = 6.674e-11


def consistent_intermediates(r1, r2, th1, r3, th3, m1, m2, m3):
    """Geometric functions built from the polar force law itself, so every relation holds exactly."""
    th2 = th1 + math.pi
    radial, transverse = polar_force_terms([r1, r2, r3], [th1, th2, th3], [m1, m2, m3], G)
    gm3, sep2 = G * m3, (r1 + r2) ** 2
    f1 = radial[0] / gm3 + (m2 / m3) / sep2
    f2 = transverse[0] / gm3
    f3 = radial[1] / gm3 + (m1 / m3) / sep2
    f4 = transverse[1] / gm3
    d = PrimaryDerivatives(r1, r2, th1, th2, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0)
    fi = ThirdBodyIntermediates(f1, f2, f3, f4, math.hypot(f1, f2), math.atan2(-f1, f2), 0.0)
    return d, fi


def test_recovers_third_body_from_consistent_data():
    # m3 comparable to the primaries keeps f1 = (primary accel) - (m2 pull) well conditioned
    rng = np.random.default_rng(5)
    m1, m2, m3 = 2e24, 1e24, 5e23
    for _ in range(500):
        r1, r2 = rng.uniform(1e8, 1e9, 2)
        th1 = rng.uniform(-math.pi, math.pi)
        r3 = rng.uniform(1e8, 2e9)
        th3 = th1 + rng.uniform(0.05, 2 * math.pi - 0.05)
        d, fi = consistent_intermediates(r1, r2, th1, r3, th3, m1, m2, m3)
        theta3, _ = theta3_from_f(fi.f1, fi.f2, th1, previous=th3)
        assert theta3 == pytest.approx(th3, abs=1e-10)
        state = r3_from_intermediates(d, fi, theta3)
        assert state.r3 == pytest.approx(r3, rel=1e-9)
        assert state.residual_m1 <= 1e-9 and state.residual_m2 <= 1e-9
        phi1 = th3 - th1
        rhs = math.sin(phi1) / (math.sqrt(2) * fi.f2 * math.sqrt(1 - math.cos(phi1)))
        assert any(abs(x - r3) <= 1e-9 * r3 for x in quadratic_r3_roots(r1, phi1, rhs))


def test_spurious_zero_root_is_avoided():
    # phi = 0 always solves the angle relation; the solver must return the other root
    for f1, f2 in [(1.0, 2.0), (-1.0, 2.0), (3.0, -0.5), (-0.2, -4.0)]:
        theta3, _ = theta3_from_f(f1, f2, 0.0)
        assert theta3 == pytest.approx(2 * math.atan2(-f1, f2), abs=1e-14)
        assert angle_relation_residual(f1, f2, theta3) <= 1e-15


def test_continuity_offset():
    theta3, _ = theta3_from_f(1.0, 2.0, 0.0, previous=13.0)
    assert abs(theta3 - 13.0) <= math.pi


def test_degenerate_angle():
    with pytest.raises(DegenerateError):
        theta3_from_f(0.0, 0.0, 0.1)


def test_quadratic_roots():
    assert quadratic_r3_roots(1.0, 0.0, 4.0) == (3.0,)
    assert quadratic_r3_roots(1.0, math.pi / 2, 0.5) == ()
    roots = quadratic_r3_roots(2.0, 0.3, 3.5)
    assert len(roots) == 2
    for x in roots:
        assert x * x - 4 * x * math.cos(0.3) + 4 == pytest.approx(3.5)


def test_angle_relation_holds_on_pinned(pinned):
    cfg, _, dc = pinned
    for t in cfg.sample_times()[::10]:
        fi = f_functions(dc, cfg, t)
        phi = theta3_of_t(dc, cfg, t) - theta1_of_t(dc, cfg, t)
        assert angle_relation_residual(fi.f1, fi.f2, phi) <= 1e-9


@pytest.mark.parametrize("t", [0.0, 5e5, 1e6])
def test_pinned_geometric_functions_carry_primary_model_error(pinned, t):
    # the closed-form primaries drop r1 thetadot^2 and their separation differs
    # from r1 + r2 at second order; f1 is exactly those two terms over G m3,
    # not the third body's pull
    cfg, _, dc = pinned
    d = m12_derivatives(dc, cfg, t)
    fi = f_functions(dc, cfg, t)
    centrifugal = -d.r1 * d.theta_dot ** 2 / (cfg.G * cfg.m3)
    separation_gap = (cfg.m2 / cfg.m3) * (1 / (d.r1 + d.r2) ** 2 - 1 / r_of_t(dc, t) ** 2)
    assert fi.f1 == pytest.approx(centrifugal + separation_gap, rel=1e-9)
    # an exact solution would make both angle relations share a root
    assert abs(fi.f1 * fi.f4 + fi.f2 * fi.f3) > 1e-3 * abs(fi.f1 * fi.f4)


def test_trajectory_records_failures(pinned):
    cfg, _, dc = pinned
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        traj = third_body_trajectory(dc, cfg, cfg.sample_times())
    assert set(np.flatnonzero(np.isnan(traj.r3))) == set(traj.failures)
    assert all(np.isfinite(traj.theta3[i]) or "DegenerateError" in msg for i, msg in traj.failures.items())
    if traj.branch_switches:
        assert any(issubclass(w.category, BranchJumpWarning) for w in caught)


def test_r3_of_t_reports_residuals(pinned):
    cfg, _, dc = pinned
    state = r3_of_t(dc, cfg, 0.0, theta3_of_t(dc, cfg, 0.0))
    assert state.r3 > 0
    assert np.isfinite(state.residual_m1) and np.isfinite(state.residual_m2)


def test_polar_residuals_vanish_on_integrated_test_particle():
    # a test particle integrated under the same force law leaves only
    # finite-difference truncation in the residuals
    m1, m2 = 2e24, 1e24
    r = [1e8, 2e8, 5e8]
    theta = [0.0, math.pi, 1.2]
    w = math.sqrt(G * (m1 + m2) / 3e8 ** 3)
    pos, vel = polar_to_cartesian(r, theta, [0.0, 0.0, 0.0], [w, w, 0.3 * w])
    traj = integrate(CartesianState(0.0, pos, vel), [m1, m2, 0.0], G,
                     IntegratorConfig(rel_tol=1e-12, abs_tol=1e-9, force_law="unit_difference"), 2e4, 100.0)
    x, y = traj.pos[..., 0], traj.pos[..., 1]
    rr = np.hypot(x, y)
    th = np.unwrap(np.arctan2(y, x), axis=0)
    radial, transverse = polar_equation_residuals(traj.t, rr[:, 0], th[:, 0], rr[:, 1], th[:, 1],
                                                  rr[:, 2], th[:, 2], m1, m2, G)
    inner = slice(2, -2)
    assert radial[inner].max() <= 1e-5 and transverse[inner].max() <= 1e-4


def test_polar_residuals_need_five_samples():
    with pytest.raises(ValueError):
        polar_equation_residuals(*([np.zeros(3)] * 7), 1.0, 1.0, G)
