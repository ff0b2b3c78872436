"""Closed-form position of the small third body.

With the primaries fixed to their closed-form motion, the radial and
transverse equations of each primary isolate four time functions ``f1..f4``
that depend on the third body only through geometry. The angle ``theta3``
follows from the ratio ``f2 / f1`` and the radius ``r3`` from the difference
of the two transverse relations.

Conventions
-----------
* ``phi1 = theta3 - theta1`` and ``phi2 = theta3 - theta2``.
* ``f2 cos(phi1) - f1 sin(phi1) = f2`` has the root ``phi1 = 0`` for every
  ``(f1, f2)``; it is introduced by clearing the ``cos(phi1) - 1`` denominator
  and is not a solution of the ratio relation, so it is never selected unless
  both roots coincide. The remaining root is ``phi1 = 2 atan2(-f1, f2)``.
* ``f4`` carries the sign obtained by resolving the Cartesian force on m2
  along its transverse unit vector: ``r2 theta'' + 2 r2' theta' = +G m3 f4``.
* The ``f`` functions subtract the primaries' mutual pull from their
  accelerations and divide by ``G m3``, which amplifies any error in the
  primary model by ``m_primary / m3``. Fed with the closed-form primaries
  they are dominated by the omitted centrifugal term ``r1 theta'^2`` and the
  second-order mismatch between ``r1 + r2`` and ``r``, so the transverse
  relations are only reproduced for self-consistent input.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ApproximationBreakdown, BranchJumpWarning, DegenerateError, SingularityError
from .oracle import polar_force_terms
from .two_body import (
    DerivedConstants,
    ScenarioConfig,
    r1_dot_of_t,
    r1_of_t,
    r2_dot_of_t,
    r2_of_t,
    r_dot_of_t,
    r_of_t,
    theta1_of_t,
    theta2_of_t,
)

__all__ = [
    "PrimaryDerivatives",
    "ThirdBodyIntermediates",
    "ThirdBodyState",
    "ThirdBodyTrajectory",
    "m12_derivatives",
    "f_functions",
    "theta3_from_f",
    "theta3_of_t",
    "angle_relation_residual",
    "r3_of_t",
    "r3_from_intermediates",
    "third_body_trajectory",
    "quadratic_r3_roots",
    "polar_equation_residuals",
    "restricted_polar_residuals",
]

_SQRT2 = math.sqrt(2.0)
_DEN_EPS = 1e-9


@dataclass(frozen=True)
class PrimaryDerivatives:
    r1: float
    r2: float
    theta1: float
    theta2: float
    r1dot: float
    r2dot: float
    r1ddot: float
    r2ddot: float
    theta_dot: float
    theta_ddot: float


@dataclass(frozen=True)
class ThirdBodyIntermediates:
    f1: float
    f2: float
    f3: float
    f4: float
    k_env: float
    psi: float
    t: float


@dataclass(frozen=True)
class ThirdBodyState:
    """Third-body position at one time.

    ``residual_m1`` and ``residual_m2`` are the relative mismatches of the
    transverse relations taken about primary 1 and primary 2.
    """

    r3: float
    theta3: float
    t: float
    residual_m1: float
    residual_m2: float


@dataclass
class ThirdBodyTrajectory:
    """Samples of the third body; failed samples hold NaN and a reason."""

    t: np.ndarray
    r3: np.ndarray
    theta3: np.ndarray
    residual_m1: np.ndarray
    residual_m2: np.ndarray
    failures: dict
    branch_switches: list


def m12_derivatives(dc: DerivedConstants, cfg: ScenarioConfig, t: float) -> PrimaryDerivatives:
    """Closed-form primary state and its first and second time derivatives at ``t``."""
    t = float(t)
    r = r_of_t(dc, t)
    rdot = r_dot_of_t(dc, t)
    theta_dot = dc.h_ang / r ** 2
    return PrimaryDerivatives(
        r1=float(r1_of_t(dc, cfg, t)),
        r2=float(r2_of_t(dc, cfg, t)),
        theta1=float(theta1_of_t(dc, cfg, t)),
        theta2=float(theta2_of_t(dc, cfg, t)),
        r1dot=float(r1_dot_of_t(dc, t)),
        r2dot=float(r2_dot_of_t(dc, t)),
        r1ddot=-cfg.G * cfg.m2 / r ** 2,
        r2ddot=-cfg.G * cfg.m1 / r ** 2,
        theta_dot=theta_dot,
        theta_ddot=-2.0 * dc.h_ang * rdot / r ** 3,
    )


def _f_from_derivatives(d: PrimaryDerivatives, cfg: ScenarioConfig, t: float) -> ThirdBodyIntermediates:
    gm3 = cfg.G * cfg.m3
    sep2 = (d.r1 + d.r2) ** 2
    f1 = (d.r1ddot - d.r1 * d.theta_dot ** 2) / gm3 + (cfg.m2 / cfg.m3) / sep2
    f2 = (d.r1 * d.theta_ddot + 2.0 * d.r1dot * d.theta_dot) / gm3
    f3 = (d.r2ddot - d.r2 * d.theta_dot ** 2) / gm3 + (cfg.m1 / cfg.m3) / sep2
    f4 = (d.r2 * d.theta_ddot + 2.0 * d.r2dot * d.theta_dot) / gm3
    return ThirdBodyIntermediates(
        f1=f1, f2=f2, f3=f3, f4=f4,
        k_env=math.hypot(f1, f2), psi=math.atan2(-f1, f2), t=t,
    )


def f_functions(dc: DerivedConstants, cfg: ScenarioConfig, t: float) -> ThirdBodyIntermediates:
    """The four geometric time functions at ``t``.

    Raises :class:`DegenerateError` when ``f1 = f2 = 0``.
    """
    fi = _f_from_derivatives(m12_derivatives(dc, cfg, t), cfg, float(t))
    if fi.k_env == 0.0:
        raise DegenerateError(f"f1 = f2 = 0 at t={float(t):.17g}: theta3 is indeterminate")
    return fi


def theta3_from_f(f1: float, f2: float, theta1: float, previous: float | None = None):
    """Solve ``f2 cos(phi) - f1 sin(phi) = f2`` for ``theta3 = theta1 + phi``.

    Returns ``(theta3, branch)`` where ``branch`` is +1 or -1 for the sign of
    the arccos term in ``phi = psi + branch * arccos(f2 / k)``. With a
    ``previous`` value the result is shifted by the multiple of ``2 pi``
    nearest to it.
    """
    k = math.hypot(f1, f2)
    if k == 0.0:
        raise DegenerateError("f1 = f2 = 0: theta3 is indeterminate")
    psi = math.atan2(-f1, f2)
    a = math.acos(max(-1.0, min(1.0, f2 / k)))
    # psi + a and psi - a: one of them is the spurious phi = 0 (mod 2 pi)
    branch = 1 if psi >= 0.0 else -1
    theta3 = theta1 + psi + branch * a
    if previous is not None:
        theta3 += 2.0 * math.pi * round((previous - theta3) / (2.0 * math.pi))
    return theta3, branch


def angle_relation_residual(f1: float, f2: float, phi: float) -> float:
    """Relative residual of ``f2 cos(phi) - f1 sin(phi) = f2``."""
    return abs(f2 * math.cos(phi) - f1 * math.sin(phi) - f2) / max(abs(f1), abs(f2))


def theta3_of_t(dc: DerivedConstants, cfg: ScenarioConfig, t: float) -> float:
    fi = f_functions(dc, cfg, t)
    return theta3_from_f(fi.f1, fi.f2, float(theta1_of_t(dc, cfg, t)))[0]


def r3_from_intermediates(d: PrimaryDerivatives, fi: ThirdBodyIntermediates, theta3: float,
                          t: float = math.nan) -> ThirdBodyState:
    """Third-body radius from given primary positions and geometric functions.

    Only ``r1, r2, theta1, theta2`` of ``d`` and ``f2, f4`` of ``fi`` are used.
    The two residual fields are the relative mismatches of the two transverse
    relations ``r3^2 - 2 r_i r3 cos(phi_i) + r_i^2 = sin(phi_i) / (sqrt(2) f sqrt(1 - cos(phi_i)))``.
    """
    phi1 = theta3 - d.theta1
    phi2 = theta3 - d.theta2
    c1, s1 = math.cos(phi1), math.sin(phi1)
    c2, s2 = math.cos(phi2), math.sin(phi2)
    den = 2.0 * d.r2 * c2 - 2.0 * d.r1 * c1
    if abs(den) <= _DEN_EPS * (d.r1 + d.r2):
        raise SingularityError(f"r3 denominator {den:.3e} vanishes at t={float(t):.17g}")
    with np.errstate(divide="ignore", invalid="ignore"):
        rhs1 = np.float64(s1) / (_SQRT2 * fi.f2 * math.sqrt(max(0.0, 1.0 - c1)))
        rhs2 = np.float64(s2) / (_SQRT2 * fi.f4 * math.sqrt(max(0.0, 1.0 - c2)))
    if not (np.isfinite(rhs1) and np.isfinite(rhs2)):
        raise SingularityError(f"transverse relation undefined at t={float(t):.17g} (f2, f4 or 1 - cos vanish)")
    r3 = (float(rhs1) - float(rhs2) + d.r2 ** 2 - d.r1 ** 2) / den
    if not r3 > 0.0:
        raise ApproximationBreakdown(f"closed-form r3 = {r3:.6g} <= 0 at t={float(t):.17g}")
    lhs1 = r3 * r3 - 2.0 * d.r1 * r3 * c1 + d.r1 ** 2
    lhs2 = r3 * r3 - 2.0 * d.r2 * r3 * c2 + d.r2 ** 2
    res1 = abs(lhs1 - rhs1) / max(abs(lhs1), abs(rhs1))
    res2 = abs(lhs2 - rhs2) / max(abs(lhs2), abs(rhs2))
    return ThirdBodyState(r3=r3, theta3=theta3, t=t, residual_m1=float(res1), residual_m2=float(res2))


def r3_of_t(dc: DerivedConstants, cfg: ScenarioConfig, t: float, theta3: float) -> ThirdBodyState:
    """Radius of the third body from the difference of the two transverse relations.

    Raises
    ------
    SingularityError
        If ``|2 r2 cos(phi2) - 2 r1 cos(phi1)| <= 1e-9 (r1 + r2)`` or a
        transverse relation is undefined.
    ApproximationBreakdown
        If the resulting radius is not positive.
    """
    t = float(t)
    d = m12_derivatives(dc, cfg, t)
    fi = _f_from_derivatives(d, cfg, t)
    return r3_from_intermediates(d, fi, float(theta3), t)


def quadratic_r3_roots(r1: float, phi1: float, rhs: float) -> tuple[float, ...]:
    """Positive roots of ``r3^2 - 2 r1 cos(phi1) r3 + r1^2 = rhs``."""
    b = r1 * math.cos(phi1)
    disc = b * b - (r1 * r1 - rhs)
    if disc < 0:
        return ()
    sq = math.sqrt(disc)
    return tuple(sorted(r for r in (b - sq, b + sq) if r > 0))


def third_body_trajectory(dc: DerivedConstants, cfg: ScenarioConfig, t) -> ThirdBodyTrajectory:
    """Evaluate the third body in time order with 2 pi continuity tracking.

    Samples whose evaluation raises are stored as NaN; the exception text is
    kept in ``failures`` keyed by sample index. A :class:`BranchJumpWarning`
    is issued once if the arccos branch changes between consecutive samples.
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    n = t.size
    r3 = np.full(n, np.nan)
    th3 = np.full(n, np.nan)
    res1 = np.full(n, np.nan)
    res2 = np.full(n, np.nan)
    failures: dict[int, str] = {}
    switches: list[int] = []
    previous = None
    prev_branch = None
    for i, ti in enumerate(t):
        try:
            d = m12_derivatives(dc, cfg, ti)
            fi = _f_from_derivatives(d, cfg, ti)
            theta3, branch = theta3_from_f(fi.f1, fi.f2, d.theta1, previous)
            previous = theta3
            th3[i] = theta3
            if prev_branch is not None and branch != prev_branch:
                switches.append(i)
            prev_branch = branch
            state = r3_from_intermediates(d, fi, theta3, ti)
        except (DegenerateError, SingularityError, ApproximationBreakdown) as exc:
            failures[i] = f"{type(exc).__name__}: {exc}"
            continue
        r3[i] = state.r3
        res1[i] = state.residual_m1
        res2[i] = state.residual_m2
    if switches:
        warnings.warn(f"theta3 arccos branch switched at {len(switches)} sample(s)",
                      BranchJumpWarning, stacklevel=2)
    return ThirdBodyTrajectory(t, r3, th3, res1, res2, failures, switches)


def _fd_first_second(t, y):
    d1 = np.gradient(y, t, edge_order=2)
    d2 = np.gradient(d1, t, edge_order=2)
    return d1, d2


def polar_equation_residuals(t, r1, theta1, r2, theta2, r3, theta3, m1, m2, G):
    """Relative residuals of the third body's radial and transverse equations.

    ``r3'', theta3''`` and the first derivatives come from second-order
    finite differences of the samples, so an exact trajectory leaves
    residuals of order ``dt^2``.
    """
    t = np.asarray(t, dtype=float)
    if t.size < 5:
        raise ValueError("at least 5 samples are needed for the finite differences")
    r3 = np.asarray(r3, dtype=float)
    theta3 = np.asarray(theta3, dtype=float)
    r3d, r3dd = _fd_first_second(t, r3)
    th3d, th3dd = _fd_first_second(t, theta3)
    radial_res = np.empty(t.size)
    trans_res = np.empty(t.size)
    for i in range(t.size):
        radial, transverse = polar_force_terms(
            [r1[i], r2[i], r3[i]], [theta1[i], theta2[i], theta3[i]], [m1, m2, 0.0], G
        )
        lhs_r = r3dd[i] - r3[i] * th3d[i] ** 2
        lhs_t = r3[i] * th3dd[i] + 2.0 * r3d[i] * th3d[i]
        radial_res[i] = abs(lhs_r - radial[2]) / max(abs(lhs_r), abs(radial[2]), 1e-300)
        trans_res[i] = abs(lhs_t - transverse[2]) / max(abs(lhs_t), abs(transverse[2]), 1e-300)
    return radial_res, trans_res


def restricted_polar_residuals(traj3: ThirdBodyTrajectory, dc: DerivedConstants, cfg: ScenarioConfig):
    """Residuals of the third body's own equations along a closed-form trajectory."""
    t = traj3.t
    return polar_equation_residuals(
        t,
        r1_of_t(dc, cfg, t), theta1_of_t(dc, cfg, t),
        r2_of_t(dc, cfg, t), theta2_of_t(dc, cfg, t),
        traj3.r3, traj3.theta3, cfg.m1, cfg.m2, cfg.G,
    )
