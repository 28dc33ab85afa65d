"""Walk through the real map (x^2 - y + y^2 f(z, l), l).

Run:  python demos/real_fibers.py
"""
from fractions import Fraction

import numpy as np

from fiberlab.exactpoly import ExactPoly, identity_witness_check, verify_nonneg_certificate
from fiberlab.fibermodel import (
    fiber_to_model_real_array,
    particular_f,
    particular_f_certificate,
    puncture_heights,
    real_cloud_to_fibers,
    real_fiber_residual,
    real_map,
    real_model_cloud,
)
from fiberlab.looplab import (
    CylinderDomain,
    cylinder_to_plane,
    homotopy_verdict,
    pushforward_loop,
    sample_model_loop,
    sup_distance,
    winding_number,
)

F = real_map()
F1 = F[0]
print("F1 =", F1)
print("f  =", particular_f())

# 1. On the critical set 2x = 0 and 2yf = 1, so F1 = -y/2.  The identity below is exact.
x, y, z, l = ExactPoly.gens(F1.variables)
f4 = particular_f().with_variables(F1.variables)
half = Fraction(1, 2)
print("\nF1 + y/2 == x*x + (y/2)(2yf - 1):",
      identity_witness_check(F1 + half * y, [x, 2 * y * f4 - 1], [x, half * y]))
print("f >= 0 certificate:", verify_nonneg_certificate(particular_f(), particular_f_certificate()).reason)

# 2. Every fiber over b > 0 is a punctured cylinder; the model map and its inverse are explicit.
cloud = real_model_cloud(10_000)
pts = real_cloud_to_fibers(cloud)
print(f"\n10^4 lattice points: max fiber residual {real_fiber_residual(pts, cloud[:, 3]).max():.2e}, "
      f"max round-trip error {np.abs(fiber_to_model_real_array(pts) - cloud[:, :3]).max():.2e}")
for lam in (0.5, 0.1, 0.0, -0.25):
    print(f"  l = {lam:+}: removed point at height {puncture_heights(lam).values}")

# 3. Two loops on the cylinder: gamma at height 1, gamma-tilde at height -1.
g, gt = sample_model_loop("gamma"), sample_model_loop("gamma_tilde")
print("\nHomotopy table (after unrolling the cylinder to the plane, e^a (u + i v)):")
for lam in (0.5, -0.5, 0.1, -0.1, 0.0):
    dom = CylinderDomain(tuple(puncture_heights(lam)))
    v = homotopy_verdict(dom, g, gt)
    extra = f"margin {v.margin:.3f}" if v.kind == "Equivalent" else f"windings {v.values}"
    print(f"  l = {lam:+}: {v.kind:<11} {extra}   punctures {dom.plane().punctures}")
print("  around i at l = 0:", winding_number(cylinder_to_plane(g), 1j), "vs", winding_number(cylinder_to_plane(gt), 1j))

# 4. The fiber loops converge uniformly as l -> 0, yet the limit loops are not homotopic.
g0 = pushforward_loop(g, "real", 0.0)
print("\nsup distance to the l = 0 loop:")
for lam in (1e-1, 1e-2, 1e-3, 1e-4):
    print(f"  l = {lam:g}: {sup_distance(pushforward_loop(g, 'real', lam), g0):.3e}")
