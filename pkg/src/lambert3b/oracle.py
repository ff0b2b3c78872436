"""Reference integration of the planar gravitational few-body problem.

The oracle integrates the full equations of motion in Cartesian coordinates
and is independent of every closed-form expression in the package. Two force
laws are available:

``"newton"``
    Inverse-square attraction along the line joining the bodies. This is the
    ground truth used for scoring.
``"unit_difference"``
    Inverse-square magnitude directed along ``(e_j - e_i) / |e_j - e_i|``,
    where ``e_i`` is the unit position vector of body ``i`` seen from the
    origin. It coincides with Newtonian gravity only for bodies on a common
    line through the origin or at equal radii, and is what the polar scalar
    equations of :func:`derivs_polar` resolve. It exists to validate that
    polar form and to generate trajectories that satisfy it exactly.

The polar evaluator :func:`derivs_polar` resolves the ``"unit_difference"`` law along
each body's radial and transverse unit vectors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CollisionError, ScenarioError, SingularityError, StepLimitError

__all__ = [
    "CartesianState",
    "IntegratorConfig",
    "ConservedMonitors",
    "Trajectory",
    "pairwise_min_separation",
    "accelerations",
    "derivs_three_body",
    "polar_force_terms",
    "derivs_polar",
    "polar_to_cartesian",
    "cartesian_to_polar",
    "cartesian_accel_to_polar",
    "monitor_conserved",
    "integrate",
    "integrate_two_body",
]

FORCE_LAWS = ("newton", "unit_difference")

# Dormand-Prince 5(4)
_DP_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_DP_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_DP_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_DP_E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40])


@dataclass
class CartesianState:
    """Positions and velocities of ``n`` bodies in the plane, shape ``(n, 2)``."""

    t: float
    pos: np.ndarray
    vel: np.ndarray

    def __post_init__(self):
        self.pos = np.array(self.pos, dtype=float).reshape(-1, 2)
        self.vel = np.array(self.vel, dtype=float).reshape(-1, 2)
        if self.pos.shape != self.vel.shape:
            raise ValueError("pos and vel must have the same shape")

    @property
    def n_bodies(self) -> int:
        return self.pos.shape[0]

    def flat(self) -> np.ndarray:
        return np.concatenate([self.pos.ravel(), self.vel.ravel()])

    @classmethod
    def from_flat(cls, t: float, y: np.ndarray) -> "CartesianState":
        half = y.size // 2
        return cls(t, y[:half].reshape(-1, 2), y[half:].reshape(-1, 2))


@dataclass(frozen=True)
class IntegratorConfig:
    """Settings for :func:`integrate`.

    ``abs_tol`` applies to every phase-space component (metres and m/s alike).
    ``min_separation=None`` means 1e-6 times the initial minimum separation.
    """

    method: str = "rk45"
    dt: float = 1.0
    rel_tol: float = 1e-10
    abs_tol: float = 1e-6
    max_steps: int = 1_000_000
    min_separation: float | None = None
    force_law: str = "newton"

    def __post_init__(self):
        method = self.method.lower()
        if method not in ("rk45", "rk4"):
            raise ScenarioError(f"unknown integration method {self.method!r}")
        object.__setattr__(self, "method", method)
        if self.force_law not in FORCE_LAWS:
            raise ScenarioError(f"force_law must be one of {FORCE_LAWS}")
        if not (self.dt > 0 and self.rel_tol > 0 and self.abs_tol > 0):
            raise ScenarioError("dt, rel_tol and abs_tol must be positive")
        if int(self.max_steps) <= 0:
            raise ScenarioError("max_steps must be positive")
        if self.min_separation is not None and not self.min_separation > 0:
            raise ScenarioError("min_separation must be positive")


@dataclass(frozen=True)
class ConservedMonitors:
    total_energy: float
    linear_momentum: np.ndarray
    angular_momentum: float
    com_velocity: np.ndarray


@dataclass
class Trajectory:
    """Output samples of one integration run; arrays indexed by sample first."""

    t: np.ndarray
    pos: np.ndarray
    vel: np.ndarray
    masses: np.ndarray
    G: float
    n_steps: int = 0
    n_rejected: int = 0
    n_fev: int = 0
    monitors: list = field(default_factory=list)

    def state(self, i: int) -> CartesianState:
        return CartesianState(self.t[i], self.pos[i], self.vel[i])

    def energy_drift(self) -> np.ndarray:
        e = np.array([m.total_energy for m in self.monitors])
        return np.abs(e - e[0]) / abs(e[0])


def pairwise_min_separation(pos: np.ndarray) -> float:
    n = pos.shape[0]
    best = math.inf
    for i in range(n):
        for j in range(i + 1, n):
            best = min(best, math.hypot(*(pos[j] - pos[i])))
    return best


def accelerations(pos: np.ndarray, masses, G: float, force_law: str = "newton",
                  min_separation: float = 0.0) -> np.ndarray:
    """Gravitational accelerations of all bodies, shape ``(n, 2)``."""
    pos = np.asarray(pos, dtype=float)
    masses = np.asarray(masses, dtype=float)
    n = pos.shape[0]
    acc = np.zeros_like(pos)
    if force_law == "unit_difference":
        radii = np.hypot(pos[:, 0], pos[:, 1])
        if np.any(radii == 0):
            raise SingularityError("unit position vector undefined at the origin")
        unit = pos / radii[:, None]
    for i in range(n):
        for j in range(i + 1, n):
            d = pos[j] - pos[i]
            dist2 = d[0] * d[0] + d[1] * d[1]
            dist = math.sqrt(dist2)
            if dist < min_separation or dist == 0.0:
                raise CollisionError(f"bodies {i} and {j} separated by {dist:.6g} m")
            if force_law == "newton":
                direction = d / dist
            else:
                de = unit[j] - unit[i]
                norm = math.hypot(de[0], de[1])
                if norm == 0.0:
                    raise SingularityError(f"bodies {i} and {j} share a polar angle")
                direction = de / norm
            g = G / dist2
            acc[i] += g * masses[j] * direction
            acc[j] -= g * masses[i] * direction
    return acc


def derivs_three_body(state: CartesianState, masses, G: float, force_law: str = "newton",
                      min_separation: float = 0.0) -> CartesianState:
    """Phase-space derivative: returns positions' rate (velocity) and acceleration
    packed as a :class:`CartesianState` with ``pos = dx/dt`` and ``vel = dv/dt``."""
    acc = accelerations(state.pos, masses, G, force_law, min_separation)
    return CartesianState(state.t, state.vel.copy(), acc)


# ---------------------------------------------------------------- polar form


def polar_force_terms(r, theta, masses, G: float):
    """Right-hand sides of the radial and transverse scalar equations.

    Returns ``(radial, transverse)``, each of length ``n``, such that
    ``r_i'' - r_i theta_i'^2 = radial[i]`` and
    ``r_i theta_i'' + 2 r_i' theta_i' = transverse[i]``.
    Each pair contributes ``G m_j [cos(th_j - th_i) - 1] / den`` radially and
    ``G m_j sin(th_j - th_i) / den`` transversely, with
    ``den = sqrt(2) [r_i^2 + r_j^2 - 2 r_i r_j cos(th_j - th_i)] sqrt(1 - cos(th_j - th_i))``.
    """
    r = np.asarray(r, dtype=float)
    theta = np.asarray(theta, dtype=float)
    masses = np.asarray(masses, dtype=float)
    n = r.size
    radial = np.zeros(n)
    transverse = np.zeros(n)
    for i in range(n):
        for j in range(n):
            if i == j or masses[j] == 0.0:
                continue
            dth = theta[j] - theta[i]
            c = math.cos(dth)
            one_minus_c = 1.0 - c
            d2 = r[i] ** 2 + r[j] ** 2 - 2.0 * r[i] * r[j] * c
            if one_minus_c <= 0.0 or d2 <= 0.0:
                raise SingularityError(f"bodies {i} and {j} share a polar angle")
            den = math.sqrt(2.0) * d2 * math.sqrt(one_minus_c)
            radial[i] += G * masses[j] * (c - 1.0) / den
            transverse[i] += G * masses[j] * math.sin(dth) / den
    return radial, transverse


def derivs_polar(r, theta, rdot, thetadot, masses, G: float):
    """Second derivatives ``(r'', theta'')`` of every body from the polar scalar equations."""
    r = np.asarray(r, dtype=float)
    rdot = np.asarray(rdot, dtype=float)
    thetadot = np.asarray(thetadot, dtype=float)
    if np.any(r <= 0):
        raise SingularityError("polar radius must be positive")
    radial, transverse = polar_force_terms(r, theta, masses, G)
    rddot = radial + r * thetadot ** 2
    thetaddot = (transverse - 2.0 * rdot * thetadot) / r
    return rddot, thetaddot


def polar_to_cartesian(r, theta, rdot, thetadot):
    """Polar state of each body to ``(pos, vel)`` arrays of shape ``(n, 2)``."""
    r, theta, rdot, thetadot = (np.asarray(a, dtype=float) for a in (r, theta, rdot, thetadot))
    c, s = np.cos(theta), np.sin(theta)
    pos = np.stack([r * c, r * s], axis=-1)
    vel = np.stack([rdot * c - r * thetadot * s, rdot * s + r * thetadot * c], axis=-1)
    return pos, vel


def cartesian_to_polar(pos, vel):
    pos = np.asarray(pos, dtype=float)
    vel = np.asarray(vel, dtype=float)
    x, y = pos[..., 0], pos[..., 1]
    vx, vy = vel[..., 0], vel[..., 1]
    r = np.hypot(x, y)
    theta = np.arctan2(y, x)
    rdot = (x * vx + y * vy) / r
    thetadot = (x * vy - y * vx) / r ** 2
    return r, theta, rdot, thetadot


def cartesian_accel_to_polar(pos, vel, acc):
    """Project Cartesian accelerations onto ``(r'', theta'')`` of each body."""
    r, theta, rdot, thetadot = cartesian_to_polar(pos, vel)
    c, s = np.cos(theta), np.sin(theta)
    a_r = acc[..., 0] * c + acc[..., 1] * s
    a_t = -acc[..., 0] * s + acc[..., 1] * c
    return a_r + r * thetadot ** 2, (a_t - 2.0 * rdot * thetadot) / r


# ---------------------------------------------------------------- monitors


def monitor_conserved(state: CartesianState, masses, G: float) -> ConservedMonitors:
    masses = np.asarray(masses, dtype=float)
    pos, vel = state.pos, state.vel
    kinetic = 0.5 * float(np.sum(masses * np.sum(vel * vel, axis=1)))
    potential = 0.0
    n = pos.shape[0]
    for i in range(n):
        for j in range(i + 1, n):
            potential -= G * masses[i] * masses[j] / math.hypot(*(pos[j] - pos[i]))
    momentum = np.sum(masses[:, None] * vel, axis=0)
    ang = float(np.sum(masses * (pos[:, 0] * vel[:, 1] - pos[:, 1] * vel[:, 0])))
    return ConservedMonitors(
        total_energy=kinetic + potential,
        linear_momentum=momentum,
        angular_momentum=ang,
        com_velocity=momentum / np.sum(masses),
    )


# ---------------------------------------------------------------- integrators


def _rk4_step(f, t, y, h):
    k1 = f(t, y)
    k2 = f(t + 0.5 * h, y + 0.5 * h * k1)
    k3 = f(t + 0.5 * h, y + 0.5 * h * k2)
    k4 = f(t + h, y + h * k3)
    return y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _dp_step(f, t, y, h, k1):
    k = [k1]
    for s in range(1, 7):
        dy = sum(a * ks for a, ks in zip(_DP_A[s], k) if a != 0.0)
        k.append(f(t + _DP_C[s] * h, y + h * dy))
    y_new = y + h * sum(b * ks for b, ks in zip(_DP_B, k) if b != 0.0)
    err = h * sum(e * ks for e, ks in zip(_DP_E, k) if e != 0.0)
    return y_new, err, k[6]


def _initial_step(f, t, y, f0, rtol, atol, t_span):
    # Hairer, Norsett & Wanner, II.4
    scale = atol + rtol * np.abs(y)
    d0 = np.sqrt(np.mean((y / scale) ** 2))
    d1 = np.sqrt(np.mean((f0 / scale) ** 2))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h0 = min(h0, t_span)
    f1 = f(t + h0, y + h0 * f0)
    d2 = np.sqrt(np.mean(((f1 - f0) / scale) ** 2)) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100 * h0, h1, t_span)


def _run(f, t0, y0, t_out, cfg: IntegratorConfig, on_sample, check_state):
    """Drive the chosen scheme through the output times ``t_out``."""
    ys = [y0.copy()]
    on_sample(0, t0, y0)
    y = y0.copy()
    t = t0
    n_steps = n_rejected = 0
    if cfg.method == "rk4":
        for i_out in range(1, len(t_out)):
            span = t_out[i_out] - t
            n_sub = max(1, int(math.ceil(span / cfg.dt - 1e-9)))
            h = span / n_sub
            for _ in range(n_sub):
                y = _rk4_step(f, t, y, h)
                t += h
                n_steps += 1
                if n_steps > cfg.max_steps:
                    raise StepLimitError(f"exceeded max_steps={cfg.max_steps}")
                check_state(y)
            t = t_out[i_out]
            ys.append(y.copy())
            on_sample(i_out, t, y)
        return ys, n_steps, n_rejected

    if len(t_out) == 1:
        return ys, n_steps, n_rejected
    k1 = f(t, y)
    h = _initial_step(f, t, y, k1, cfg.rel_tol, cfg.abs_tol, t_out[-1] - t0)
    for i_out in range(1, len(t_out)):
        target = t_out[i_out]
        while t < target:
            remaining = target - t
            clipped = h >= remaining
            step = remaining if clipped else h
            y_new, err, k7 = _dp_step(f, t, y, step, k1)
            scale = cfg.abs_tol + cfg.rel_tol * np.maximum(np.abs(y), np.abs(y_new))
            err_norm = float(np.sqrt(np.mean((err / scale) ** 2)))
            if err_norm <= 1.0:
                t = target if clipped else t + step
                y = y_new
                k1 = k7
                n_steps += 1
                if n_steps > cfg.max_steps:
                    raise StepLimitError(f"exceeded max_steps={cfg.max_steps}")
                check_state(y)
                factor = 5.0 if err_norm == 0.0 else min(5.0, max(0.2, 0.9 * err_norm ** -0.2))
                if not clipped:
                    h = step * factor
                else:
                    h = max(h, step * factor) if factor >= 1.0 else step * factor
            else:
                n_rejected += 1
                h = step * max(0.2, 0.9 * err_norm ** -0.2)
                if h < 1e-14 * max(1.0, abs(t)):
                    raise StepLimitError(f"step size underflow at t={t:.6g}")
        ys.append(y.copy())
        on_sample(i_out, t, y)
    return ys, n_steps, n_rejected


def _output_times(t0: float, t_end: float, dt_out: float) -> np.ndarray:
    n = int(math.floor((t_end - t0) / dt_out * (1 + 1e-12) + 1e-9))
    return t0 + dt_out * np.arange(n + 1)


def integrate(initial: CartesianState, masses, G: float, cfg: IntegratorConfig,
              t_end: float, dt_out: float) -> Trajectory:
    """Integrate the ``n``-body problem from ``initial`` and sample every ``dt_out``.

    Raises
    ------
    CollisionError
        When any pair comes closer than the minimum separation.
    StepLimitError
        When ``cfg.max_steps`` accepted steps are exceeded.
    """
    masses = np.asarray(masses, dtype=float)
    n = initial.n_bodies
    if masses.size != n:
        raise ValueError("one mass per body required")
    min_sep = cfg.min_separation
    if min_sep is None:
        min_sep = 1e-6 * pairwise_min_separation(initial.pos) if n > 1 else 0.0
    nfev = [0]

    def f(t, y):
        nfev[0] += 1
        pos = y[: 2 * n].reshape(n, 2)
        acc = accelerations(pos, masses, G, cfg.force_law, min_sep)
        return np.concatenate([y[2 * n:], acc.ravel()])

    def check_state(y):
        if n > 1 and pairwise_min_separation(y[: 2 * n].reshape(n, 2)) < min_sep:
            raise CollisionError("minimum separation violated")

    t_out = _output_times(initial.t, t_end, dt_out)
    monitors = []

    def on_sample(i, t, y):
        monitors.append(monitor_conserved(CartesianState.from_flat(t, y), masses, G))

    ys, n_steps, n_rej = _run(f, initial.t, initial.flat(), t_out, cfg, on_sample, check_state)
    ys = np.array(ys)
    return Trajectory(
        t=t_out,
        pos=ys[:, : 2 * n].reshape(-1, n, 2),
        vel=ys[:, 2 * n:].reshape(-1, n, 2),
        masses=masses,
        G=G,
        n_steps=n_steps,
        n_rejected=n_rej,
        n_fev=nfev[0],
        monitors=monitors,
    )


def integrate_two_body(rel_pos, rel_vel, m1: float, m2: float, G: float,
                       cfg: IntegratorConfig, t0: float, t_end: float, dt_out: float,
                       com_pos=(0.0, 0.0), com_vel=(0.0, 0.0)) -> Trajectory:
    """Integrate the relative vector ``r = r2 - r1`` under ``r'' = -G (m1 + m2) r / |r|^3``.

    The returned trajectory holds both bodies, rebuilt from the relative
    motion and the uniformly moving centre of mass.
    """
    mu = G * (m1 + m2)
    com_pos = np.asarray(com_pos, dtype=float)
    com_vel = np.asarray(com_vel, dtype=float)

    def f(t, y):
        rr = math.hypot(y[0], y[1])
        if rr == 0.0:
            raise CollisionError("relative separation reached zero")
        a = -mu / rr ** 3
        return np.array([y[2], y[3], a * y[0], a * y[1]])

    d0 = math.hypot(*rel_pos)
    min_sep = cfg.min_separation if cfg.min_separation is not None else 1e-6 * d0

    def check_state(y):
        if math.hypot(y[0], y[1]) < min_sep:
            raise CollisionError("minimum separation violated")

    t_out = _output_times(t0, t_end, dt_out)
    y0 = np.array([rel_pos[0], rel_pos[1], rel_vel[0], rel_vel[1]], dtype=float)
    ys, n_steps, n_rej = _run(f, t0, y0, t_out, cfg, lambda *a: None, check_state)
    ys = np.array(ys)
    rel = ys[:, :2]
    vrel = ys[:, 2:]
    M = m1 + m2
    com = com_pos + np.outer(t_out - t0, com_vel)
    pos = np.stack([com - m2 / M * rel, com + m1 / M * rel], axis=1)
    vel = np.stack([com_vel - m2 / M * vrel, com_vel + m1 / M * vrel], axis=1)
    masses = np.array([m1, m2])
    traj = Trajectory(t=t_out, pos=pos, vel=vel, masses=masses, G=G,
                      n_steps=n_steps, n_rejected=n_rej)
    traj.monitors = [monitor_conserved(traj.state(i), masses, G) for i in range(len(t_out))]
    return traj
