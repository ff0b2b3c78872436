"""Tour of the two real Lambert W branches.

Prints a few values on each branch, the residual ``|w e^w - x|`` and the
behaviour near the branch point ``-1/e``, where the two branches meet and
small changes in ``x`` move ``w`` by roughly ``sqrt(2 e dx)``.
"""

import math

from lambert3b.lambert_w import BRANCH_POINT, lambertw_negexp, w_eval

print("x                      W0(x)                  |w e^w - x| / max(1, |x|)")
for x in (-0.3, -0.1, 0.0, 1.0, math.e, 1e3, 1e300):
    res = w_eval(0, x)
    print(f"{x:<22.6g} {res.value:<22.17g} {res.residual / max(1.0, abs(x)):.2e}")

print("\nx                      W-1(x)                 |w e^w - x| / max(1, |x|)")
for x in (-0.3, -0.1, -1e-3, -1e-100, -1e-300):
    res = w_eval(-1, x)
    print(f"{x:<22.6g} {res.value:<22.17g} {res.residual / max(1.0, abs(x)):.2e}")

print("\napproaching -1/e from above")
for dx in (1e-2, 1e-4, 1e-8, 1e-11):
    x = BRANCH_POINT + dx
    w0, wm1 = w_eval(0, x).value, w_eval(-1, x).value
    print(f"dx={dx:<8.0e} W0={w0:+.12f}  W-1={wm1:+.12f}  gap={w0 - wm1:.3e}  sqrt(8e dx)={math.sqrt(8 * math.e * dx):.3e}")

# Far out on the lower branch the argument itself underflows; the log form does not.
s = -5e4
print(f"\nW-1(-exp({s:g})) = {lambertw_negexp(s, -1):.17g}  (exp({s:g}) underflows to {math.exp(s)})")
