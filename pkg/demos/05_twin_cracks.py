# Two genuinely different cracks whose surface data agree exactly:
# without geometric restrictions, surface measurements cannot decide
# between them.
#
# Both cracks are graphs over the disk of radius 2, flat at depth -2 on
# the annulus and capped by spherical caps over the unit disk; one cap
# bulges up, the other down.  With the slip 3 on the unit disk and
# 4 - r^2 on the annulus, their potentials differ by the dipole field
# of the closed lens between the caps, which is a constant -3 inside
# the lens and exactly 0 outside, so both Dirichlet and Neumann data
# on the surface plane coincide.

import numpy as np

from halfcrack import SensorSet
from halfcrack.counterexample import (
    CounterexampleSetup,
    eval_counterexample_field,
    field_difference,
    verify_indistinguishable,
)
from halfcrack.geometry import CapKind

setup = CounterexampleSetup()
sensors = SensorSet.grid(-4.0, 4.0, -4.0, 4.0, 21, 21)

max_du, max_ddu, scale = verify_indistinguishable(setup, sensors)
print(f"max |u1 - u2| on the surface grid: {max_du:.2e} (field scale {scale:.4f})")
print(f"max |d(u1 - u2)/dx3| on the surface: {max_ddu:.2e}")

# The individual fields are far from zero; only their difference
# collapses on the surface.
u1 = eval_counterexample_field(setup, CapKind.CAP_LOW, sensors.points3())
print(f"max |u1| over the sensors: {np.max(np.abs(u1)):.4f}")

print("\ninterior identity of the difference field:")
for p in ([0.0, 0.0, -2.0], [0.3, 0.2, -2.1], [0.0, 0.0, -10.0], [3.0, 0.0, -2.0]):
    val = field_difference(setup, np.array(p))
    where = "inside lens" if abs(val + 3.0) < 0.5 else "outside lens"
    print(f"  u1 - u2 at {p}: {val:+.6f}  ({where})")

# Refining the quadrature shrinks the (already tiny) surface mismatch,
# confirming it is pure quadrature error around the exact zero.
coarse = CounterexampleSetup(n_r=6, n_theta=12)
du_c, _, _ = verify_indistinguishable(coarse, sensors)
du_f, _, _ = verify_indistinguishable(coarse.refined(2), sensors)
print(f"\nquadrature study: coarse {du_c:.2e} -> refined {du_f:.2e}")
