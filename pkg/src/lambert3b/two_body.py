"""Closed-form approximate motion of the two primaries.

Dropping the centrifugal term of the radial two-body equation and truncating
the energy integral at first order in ``A / (B r)`` gives the implicit
relation ``r - k ln r = f(t)`` with ``k = A / 2B``, whose explicit solution
is ``r(t) = -k W(c4 exp(c5 t))``. The individual radii follow from integrating
``r1'' = -G m2 / r^2`` and ``r2'' = -G m1 / r^2`` twice, and the common polar
angle from ``theta' = r_o^2 theta'_o / r^2``. With ``dW/dt = c5 W / (1 + W)``
all three integrals are elementary in ``W``.

Notation
--------
``A = 2 G (m1 + m2)``, ``B = rdot_o^2 - A / r_o``, ``k = A / 2B``,
``c2 = sigma * 2 B sqrt(B) / A``, ``c5 = -c2``, ``c1 = -(r_o / k) exp(-r_o / k)``,
``c4 = c1 exp(c2 t0)``.

Lambert arguments are carried as ``s = ln(-x)`` so that radii far beyond
``k`` stay representable.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ApproximationBreakdown,
    DegenerateOrbitError,
    DomainError,
    ScenarioError,
    SingularityError,
    SmallMassRatioWarning,
    SolvabilityError,
)
from .lambert_w import Branch, lambertw_negexp

__all__ = [
    "G_SI",
    "ScenarioConfig",
    "DerivedConstants",
    "ValidityReport",
    "ConicConstants",
    "derive_constants",
    "lambert_w_of_t",
    "r_of_t",
    "r_dot_of_t",
    "r1_of_t",
    "r2_of_t",
    "r1_dot_of_t",
    "r2_dot_of_t",
    "theta_dot_of_t",
    "theta1_of_t",
    "theta2_of_t",
    "implicit_residual",
    "check_validity",
    "fit_conic_constants",
    "conic_radius",
]

G_SI = 6.674e-11
_ANGLE_TOL = 1e-9
_R0_MATCH = 1e-9
_VALIDITY_SAMPLES = 1001


@dataclass(frozen=True)
class ScenarioConfig:
    """Masses, initial polar state and sampling of one scenario (SI units).

    Radii are measured from the centre of mass of the primaries and
    ``theta2o`` must equal ``theta1o + pi``.
    """

    m1: float
    m2: float
    m3: float
    r1o: float
    r2o: float
    rdot1o: float
    rdot2o: float
    theta1o: float
    theta2o: float
    thetadot_o: float
    t_end: float
    dt_out: float
    t0: float = 0.0
    G: float = G_SI

    def __post_init__(self):
        for name in ("m1", "m2", "m3", "r1o", "r2o", "rdot1o", "rdot2o", "theta1o",
                     "theta2o", "thetadot_o", "t_end", "dt_out", "t0", "G"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, float, np.floating, np.integer)):
                raise ScenarioError(f"{name} must be a real number, got {value!r}")
            if not math.isfinite(value):
                raise ScenarioError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, float(value))
        if min(self.m1, self.m2, self.m3) <= 0:
            raise ScenarioError("all masses must be positive")
        if self.G <= 0:
            raise ScenarioError("G must be positive")
        if self.r1o <= 0 or self.r2o <= 0:
            raise ScenarioError("initial radii r1o, r2o must be positive")
        if self.dt_out <= 0:
            raise ScenarioError("dt_out must be positive")
        if not self.t_end > self.t0:
            raise ScenarioError("t_end must exceed t0")
        if abs(self.theta2o - self.theta1o - math.pi) > _ANGLE_TOL:
            raise ScenarioError(
                "theta2o must equal theta1o + pi (primaries on opposite sides of the centre of mass)"
            )
        if self.m3 > 1e-3 * min(self.m1, self.m2):
            warnings.warn(
                f"m3/min(m1, m2) = {self.m3 / min(self.m1, self.m2):.3g}; the third body is "
                "assumed not to perturb the primaries",
                SmallMassRatioWarning,
                stacklevel=3,
            )

    @property
    def r_o(self) -> float:
        return self.r1o + self.r2o

    @property
    def rdot_o(self) -> float:
        return self.rdot1o + self.rdot2o

    @property
    def total_mass(self) -> float:
        return self.m1 + self.m2

    @property
    def masses(self) -> np.ndarray:
        return np.array([self.m1, self.m2, self.m3])

    def sample_times(self) -> np.ndarray:
        """Output grid ``t0, t0 + dt_out, ...`` up to and including ``t_end``."""
        n = int(math.floor((self.t_end - self.t0) / self.dt_out * (1 + 1e-12) + 1e-9))
        return self.t0 + self.dt_out * np.arange(n + 1)


@dataclass(frozen=True)
class DerivedConstants:
    """Constants of the closed-form primary solution, built by :func:`derive_constants`."""

    A: float
    B: float
    kk: float
    c1: float
    c2: float
    c4: float
    c5: float
    k1: float
    k2: float
    ka: float
    kb: float
    kc: float
    kd: float
    h_ang: float
    sigma: int
    branch: Branch
    t0: float
    t_end: float
    r_o: float
    w0: float
    log_neg_c1: float
    theta_coeff: float = field(repr=False)

    def log_arg(self, t):
        """``ln(-c4 exp(c5 t))`` evaluated relative to ``t0``."""
        return self.log_neg_c1 + self.c5 * (np.asarray(t, dtype=float) - self.t0)


@dataclass(frozen=True)
class ValidityReport:
    b_positive: bool
    theta_rate_ok: bool
    radius_ok: bool
    binomial_margin: float
    overall: bool

    def as_dict(self) -> dict:
        return {
            "b_positive": self.b_positive,
            "theta_rate_ok": self.theta_rate_ok,
            "radius_ok": self.radius_ok,
            "binomial_margin": self.binomial_margin,
            "overall": self.overall,
        }


@dataclass(frozen=True)
class ConicConstants:
    """Constants of the conic ``r = 1 / (C cos(theta + phi) + p_inv)``."""

    C: float
    phi: float
    p_inv: float
    h_two_body: float


def _safe_exp(x: float) -> float:
    try:
        return math.exp(x)
    except OverflowError:
        return math.inf


def derive_constants(cfg: ScenarioConfig) -> DerivedConstants:
    """Build the closed-form constants for ``cfg``.

    The sign of ``c2`` follows the initial radial direction, and the Lambert
    branch is the one reproducing ``r_o`` at ``t0`` (principal on a tie).

    Raises
    ------
    SolvabilityError
        If ``B <= 0`` or the initial radial speed is zero.
    DomainError
        If the Lambert argument leaves ``(-1/e, 0)`` before ``t_end``.
    """
    M = cfg.total_mass
    A = 2.0 * cfg.G * M
    r_o = cfg.r_o
    rdot_o = cfg.rdot_o
    B = rdot_o ** 2 - A / r_o
    if not B > 0:
        raise SolvabilityError(
            f"B = rdot_o^2 - 2G(m1+m2)/r_o = {B:.6g} <= 0: the closed form requires B > 0"
        )
    if rdot_o == 0:
        raise SolvabilityError("rdot_o = 0 leaves the sign of c2 undetermined")
    sigma = 1 if rdot_o > 0 else -1
    kk = A / (2.0 * B)
    c2 = sigma * 2.0 * B * math.sqrt(B) / A
    c5 = -c2
    rho = r_o / kk
    log_neg_c1 = math.log(rho) - rho
    c1 = -math.exp(log_neg_c1)
    c4 = -_safe_exp(log_neg_c1 + c2 * cfg.t0)

    if log_neg_c1 > -1.0 + 1e-12:
        raise DomainError("Lambert argument at t0 lies below -1/e")
    branch = None
    w0 = math.nan
    for candidate in (Branch.PRINCIPAL, Branch.LOWER):
        w = lambertw_negexp(log_neg_c1, candidate)
        if abs(-kk * w - r_o) <= _R0_MATCH * r_o:
            branch, w0 = candidate, w
            break
    if branch is None:
        raise DomainError("no real Lambert branch reproduces r_o at t0")

    s_end = log_neg_c1 + c5 * (cfg.t_end - cfg.t0)
    if s_end > -1.0 + 1e-12:
        raise DomainError(
            "Lambert argument reaches the branch point -1/e inside the horizon "
            f"(ln(-x) = {s_end:.6g} at t_end)"
        )

    k1 = -4.0 * B * B * cfg.G * cfg.m2 / (A * A)
    k2 = -4.0 * B * B * cfg.G * cfg.m1 / (A * A)
    kb = k1 / (2.0 * c5)
    kd = k2 / (2.0 * c5)
    ka = cfg.rdot1o + kb * _first_integral(w0)
    kc = cfg.rdot2o + kd * _first_integral(w0)
    h_ang = r_o ** 2 * cfg.thetadot_o
    return DerivedConstants(
        A=A, B=B, kk=kk, c1=c1, c2=c2, c4=c4, c5=c5, k1=k1, k2=k2,
        ka=ka, kb=kb, kc=kc, kd=kd, h_ang=h_ang, sigma=sigma, branch=branch,
        t0=cfg.t0, t_end=cfg.t_end, r_o=r_o, w0=w0, log_neg_c1=log_neg_c1,
        theta_coeff=h_ang / (kk * kk * c5),
    )


# Antiderivatives in W, using dt = (1 + W) / (c5 W) dW.
def _first_integral(w):
    return (1.0 + 2.0 * w) / (w * w)


def _second_integral(w):
    return 0.5 / (w * w) + 3.0 / w - 2.0 * np.log(-w)


def _angle_integral(w):
    return -(1.0 + 2.0 * w) / (2.0 * w * w)


def lambert_w_of_t(dc: DerivedConstants, t):
    """``W(c4 exp(c5 t))`` on the stored branch; scalar in, scalar out."""
    s = dc.log_arg(t)
    if s.ndim == 0:
        return lambertw_negexp(float(s), dc.branch)
    return np.array([lambertw_negexp(si, dc.branch) for si in s.ravel()]).reshape(s.shape)


def r_of_t(dc: DerivedConstants, t):
    """Separation of the primaries, ``-k W(c4 e^{c5 t})``."""
    return -dc.kk * lambert_w_of_t(dc, t)


def r_dot_of_t(dc: DerivedConstants, t):
    """Time derivative of :func:`r_of_t` by the chain rule."""
    w = lambert_w_of_t(dc, t)
    return -dc.kk * dc.c5 * w / (1.0 + w)


def implicit_residual(dc: DerivedConstants, t):
    """Relative residual of ``r - k ln r = f(t)`` along :func:`r_of_t`."""
    r = r_of_t(dc, t)
    f = dc.sigma * math.sqrt(dc.B) * (np.asarray(t, dtype=float) - dc.t0) + dc.r_o - dc.kk * math.log(dc.r_o)
    return np.abs(r - dc.kk * np.log(r) - f) / np.maximum(1.0, np.abs(f))


def _radius(dc, t, r_init, k_lin, k_curv, name):
    w = lambert_w_of_t(dc, t)
    dt = np.asarray(t, dtype=float) - dc.t0
    r = r_init + k_lin * dt + (k_curv / dc.c5) * (_second_integral(w) - _second_integral(dc.w0))
    if np.any(~(np.asarray(r) > 0)):
        raise ApproximationBreakdown(f"closed-form {name} became nonpositive inside the evaluated times")
    return r


def r1_of_t(dc: DerivedConstants, cfg: ScenarioConfig, t):
    """Distance of m1 from the centre of mass (double integral of ``-G m2 / r^2``)."""
    return _radius(dc, t, cfg.r1o, dc.ka, dc.kb, "r1")


def r2_of_t(dc: DerivedConstants, cfg: ScenarioConfig, t):
    """Distance of m2 from the centre of mass (double integral of ``-G m1 / r^2``)."""
    return _radius(dc, t, cfg.r2o, dc.kc, dc.kd, "r2")


def r1_dot_of_t(dc: DerivedConstants, t):
    return dc.ka - dc.kb * _first_integral(lambert_w_of_t(dc, t))


def r2_dot_of_t(dc: DerivedConstants, t):
    return dc.kc - dc.kd * _first_integral(lambert_w_of_t(dc, t))


def theta_dot_of_t(dc: DerivedConstants, t):
    """Common angular rate ``h / r(t)^2`` of both primaries."""
    return dc.h_ang / r_of_t(dc, t) ** 2


def _theta_increment(dc, t):
    w = lambert_w_of_t(dc, t)
    return dc.theta_coeff * (_angle_integral(w) - _angle_integral(dc.w0))


def theta1_of_t(dc: DerivedConstants, cfg: ScenarioConfig, t):
    """Unwrapped polar angle of m1."""
    return cfg.theta1o + _theta_increment(dc, t)


def theta2_of_t(dc: DerivedConstants, cfg: ScenarioConfig, t):
    """Unwrapped polar angle of m2; differs from ``theta1`` by the constant ``theta2o - theta1o``."""
    return cfg.theta2o + _theta_increment(dc, t)


def check_validity(cfg: ScenarioConfig, dc: DerivedConstants) -> ValidityReport:
    """Evaluate the approximation's stated conditions over ``[t0, t_end]``.

    ``r(t)`` is monotone, so the endpoints already bound the extremes; the
    interior samples guard against surprises.
    """
    t = np.linspace(cfg.t0, cfg.t_end, _VALIDITY_SAMPLES)
    r = r_of_t(dc, t)
    thetadot = dc.h_ang / r ** 2
    b_positive = dc.B > 0
    theta_rate_ok = bool(np.all(np.abs(thetadot) < 1.0))
    radius_ok = bool(np.all(r > dc.A / abs(dc.B)))
    margin = float(np.max(dc.A / (dc.B * r)))
    return ValidityReport(
        b_positive=b_positive,
        theta_rate_ok=theta_rate_ok,
        radius_ok=radius_ok,
        binomial_margin=margin,
        overall=b_positive and theta_rate_ok and radius_ok,
    )


def fit_conic_constants(cfg: ScenarioConfig) -> ConicConstants:
    """Match the conic orbit of the relative vector to the initial state.

    The relative vector points from m1 to m2, so its angle is ``theta2``.
    ``C >= 0`` by convention; ``phi`` absorbs the orientation.
    """
    if cfg.thetadot_o == 0:
        raise DegenerateOrbitError("thetadot_o = 0: zero angular momentum, conic undefined")
    r_o = cfg.r_o
    h = r_o ** 2 * cfg.thetadot_o
    p_inv = cfg.G * cfg.total_mass / h ** 2
    # u = 1/r: u(theta_o) - p_inv = C cos(.), du/dtheta = -C sin(.)
    a = 1.0 / r_o - p_inv
    b = -(cfg.rdot_o / cfg.thetadot_o) / r_o ** 2
    C = math.hypot(a, b)
    phi = math.atan2(-b, a) - cfg.theta2o if C > 0 else 0.0
    return ConicConstants(C=C, phi=phi, p_inv=p_inv, h_two_body=h)


def conic_radius(cc: ConicConstants, theta):
    den = cc.C * np.cos(np.asarray(theta, dtype=float) + cc.phi) + cc.p_inv
    if np.any(den <= 0):
        raise SingularityError("conic denominator <= 0: orbit does not reach this angle")
    return 1.0 / den
