"""The third body's closed-form position, and why it is fragile.

The angle of the light body follows from a linear relation in ``cos`` and
``sin`` of its offset from primary 1, with coefficients f1 and f2 built from
the primaries' accelerations minus their mutual pull, divided by ``G m3``.

First, on synthetic data generated from the force law itself, the relations
return the body's true position to roundoff. Then, on the closed-form
primaries, f1 turns out to be exactly the primaries' omitted centrifugal term
plus their second-order separation mismatch: the recovered "third body" is
explaining modelling error, not its own gravity.
"""

import math
import warnings
from pathlib import Path

from lambert3b.oracle import polar_force_terms
from lambert3b.scenario_io import load_scenario
from lambert3b.third_body import (
    PrimaryDerivatives,
    ThirdBodyIntermediates,
    f_functions,
    m12_derivatives,
    r3_from_intermediates,
    theta3_from_f,
)
from lambert3b.two_body import derive_constants, r_of_t

G = 6.674e-11

# synthetic, self-consistent configuration
m1, m2, m3 = 2e24, 1e24, 5e23
r1, r2, th1 = 3e8, 6e8, 0.4
r3_true, th3_true = 8e8, 2.1
radial, transverse = polar_force_terms([r1, r2, r3_true], [th1, th1 + math.pi, th3_true], [m1, m2, m3], G)
gm3, sep2 = G * m3, (r1 + r2) ** 2
f1 = radial[0] / gm3 + (m2 / m3) / sep2
f3 = radial[1] / gm3 + (m1 / m3) / sep2
fi = ThirdBodyIntermediates(f1, transverse[0] / gm3, f3, transverse[1] / gm3, 0.0, 0.0, 0.0)
theta3, _ = theta3_from_f(fi.f1, fi.f2, th1, previous=th3_true)
state = r3_from_intermediates(PrimaryDerivatives(r1, r2, th1, th1 + math.pi, *[0.0] * 6), fi, theta3)
print(f"synthetic: theta3 {theta3:.12f} (true {th3_true}), r3 {state.r3:.6e} (true {r3_true:.6e})")

# closed-form primaries
warnings.simplefilter("ignore")
cfg, _ = load_scenario(Path(__file__).resolve().parents[1] / "tests" / "fixtures" / "pinned.toml")
dc = derive_constants(cfg)
print("\n t [s]      f1            centrifugal   separation gap")
for t in (0.0, 2.5e5, 5e5, 1e6):
    d = m12_derivatives(dc, cfg, t)
    f = f_functions(dc, cfg, t)
    cent = -d.r1 * d.theta_dot ** 2 / (cfg.G * cfg.m3)
    gap = (cfg.m2 / cfg.m3) * (1 / (d.r1 + d.r2) ** 2 - 1 / r_of_t(dc, t) ** 2)
    print(f"{t:<10.3g} {f.f1:<+13.6e} {cent:<+13.6e} {gap:+.6e}")
true_scale = 1 / (cfg.r_o ** 2)
print(f"\na genuine third-body term would be about 1/d^2 ~ {true_scale:.1e} m^-2")
