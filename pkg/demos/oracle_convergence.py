"""How trustworthy is the oracle?

Integrates an Earth-Moon-like binary with fixed-step RK4 at several step
sizes and with adaptive Dormand-Prince at several tolerances, reporting the
closure error after one period and the relative energy drift.
"""

import math

import numpy as np

from lambert3b.oracle import CartesianState, IntegratorConfig, integrate, polar_to_cartesian

G, m1, m2, a = 6.674e-11, 5.972e24, 7.342e22, 3.844e8
M = m1 + m2
period = 2 * math.pi * math.sqrt(a ** 3 / (G * M))
w = math.sqrt(G * M / a) / a
pos, vel = polar_to_cartesian([m2 / M * a, m1 / M * a], [0.0, math.pi], [0.0, 0.0], [w, w])
state = CartesianState(0.0, pos, vel)

print("RK4 steps/period   closure error   ratio")
prev = None
for n in (50, 100, 200, 400, 800):
    traj = integrate(state, [m1, m2], G, IntegratorConfig(method="rk4", dt=period / n), period, period)
    err = np.max(np.abs(traj.pos[-1] - traj.pos[0])) / a
    print(f"{n:<18d} {err:<15.3e} {'' if prev is None else f'{prev / err:.2f}'}")
    prev = err

print("\nDOPRI rel_tol    steps   closure error   max energy drift")
for tol in (1e-8, 1e-10, 1e-12):
    traj = integrate(state, [m1, m2], G, IntegratorConfig(rel_tol=tol, abs_tol=tol * 1e3), period, period / 20)
    err = np.max(np.abs(traj.pos[-1] - traj.pos[0])) / a
    print(f"{tol:<15.0e} {traj.n_steps:<7d} {err:<15.3e} {traj.energy_drift().max():.3e}")
