# Forward problem walkthrough: a buried tilted crack with a smooth slip,
# the potential it induces, and the properties the field must satisfy.
#
# The crack is the plane x3 = 0.2 x1 - 0.1 x2 - 1.5 over the footprint
# [-1, 1]^2; the slip is a radial bump vanishing at the footprint edge.

import numpy as np

from halfcrack import (
    PlaneParams,
    SensorSet,
    SlipGrid,
    SourceRegion,
    assemble_A,
    check_harmonic,
    check_neumann_top,
    eval_field,
    extract_jump,
    make_frame,
)

region = SourceRegion(-1.0, 1.0, -1.0, 1.0, 9, 9)
m = PlaneParams(0.2, -0.1, -1.5)
slip = SlipGrid.from_family(region, "bump", amplitude=1.0, center1=0.1, center2=-0.05, radius=0.8)
sensors = SensorSet.grid(-3.0, 3.0, -3.0, 3.0, 11, 11)

print("crack frame:", make_frame(m))
print("slip H1 norm:", slip.h1_norm())

# The crack-to-boundary operator maps interior nodal slips to sensor data.
A = assemble_A(m, region, sensors, quad_order=4)
data = A.apply(slip)
print(f"operator shape {A.entries.shape}, data norm {data.l2v_norm():.4e}")

# The same integral evaluates the potential anywhere off the crack.
probe = np.array([0.5, 0.3, -0.6])
print("field at", probe, "=", eval_field(m, region, slip, probe))

# Harmonicity: a 7-point finite-difference Laplacian at interior probes
# stays at the truncation level.
probes = np.array([[0.4, 0.3, -0.5], [2.0, -1.0, -2.5], [-1.5, 0.8, -0.9]])
print("scaled FD Laplacian max:", check_harmonic(m, region, slip, probes))

# The mirror-image kernel kills the vertical derivative on the surface
# plane identically, not just approximately.
max_abs, max_rel = check_neumann_top(m, region, slip, sensors.points)
print(f"surface normal derivative: abs {max_abs:.1e}, relative {max_rel:.1e}")

# Far from the crack the potential decays like 1/|x|^2: doubling the
# distance quarters the value.
direction = np.array([-m.a, -m.b, 0.0])
direction /= np.linalg.norm(direction)
direction[2] = -0.5
direction /= np.linalg.norm(direction)
ts = np.array([32.0, 64.0, 128.0])
vals = eval_field(m, region, slip, direction[None, :] * ts[:, None])
print("decay ratios u(2x)/u(x):", vals[1:] / vals[:-1])

# Crossing the crack, the potential jumps by exactly the slip; offset
# evaluations extrapolated to zero offset recover it.
point = (0.125, 0.125)
jump, diffs = extract_jump(m, region, slip, point, [0.2, 0.1, 0.05, 0.025])
print(f"jump at {point}: extrapolated {jump:.6f} vs slip {slip.value_at(np.array(point)):.6f}")
print("offset differences:", np.round(diffs, 5))
