"""Walk through the complex map (x (y^2 + l z - 1)(l y^2 + l^2 z - l + 1), l).

Run:  python demos/complex_fibers.py
"""
from fractions import Fraction

import numpy as np

from fiberlab.exactpoly import ExactPoly, GaussianRational, evaluate, identity_witness_check
from fiberlab.fibermodel import complex_f, complex_map, complex_model_cloud, g_complex, h_complex, h_complex_array, submersion_sample_report
from fiberlab.looplab import (
    PuncturedPlane,
    complex_limit_loop,
    complex_model_loop,
    homotopy_verdict,
    loop_from_function,
    pushforward_loop,
    straight_line_homotopy_certify,
    sup_distance,
    winding_number,
)

f = complex_f()
print("f =", f)
print("f == x * df/dx:", identity_witness_check(f, [f.diff("x")], [ExactPoly.var(f.variables, "x")]))

# An exact point on the fiber over (b, l) = (1 + i/2, 1/3).
u, v = GaussianRational(Fraction(1, 2), 1), GaussianRational(2, Fraction(-1, 3))
lam, b = GaussianRational(Fraction(1, 3)), GaussianRational(1, Fraction(1, 2))
pt = h_complex(u, v, lam, b)
print("\nh(u, v) =", [str(c) for c in pt])
print("F(h(u, v)) == b exactly:", evaluate(f, pt, "complex") == b, "; g(h(u, v)) == (u, v):", g_complex(*pt) == (u, v))

u, v, lam, b = complex_model_cloud(10_000)
rep = submersion_sample_report(complex_map(), h_complex_array(u, v, lam, b), "complex", np.column_stack([b, lam]))
print(f"min Jacobian singular value over 10^4 fiber points: {rep.min_singular_value:.4f}")

# The two loops and their limits.
print("\nsup distance to the closed-form limits:")
for which in (1, 2):
    loop, lim = complex_model_loop(which), complex_limit_loop(which)
    d = [sup_distance(pushforward_loop(loop, "complex", l), lim) for l in (1e-1, 1e-2, 1e-3, 1e-4)]
    print(f"  gamma_{which}: " + ", ".join(f"{x:.2e}" for x in d))

e = [loop_from_function(lambda t, s=s: np.exp(1j * t) * (np.exp(1j * t) + s)) for s in (2, -2)]
print("\nx-limits wind around 0:", [winding_number(loop, 0) for loop in e], "(equal)")
print("straight line between them:", straight_line_homotopy_certify(e[0], e[1], PuncturedPlane((0,))).kind,
      "(no certificate; equal windings alone decide nothing)")
mu1, mu2 = complex_limit_loop(1).coordinate(1), complex_limit_loop(2).coordinate(1)
v = homotopy_verdict(PuncturedPlane((1, -1)), mu1, mu2)
print("y-limits in C minus {1, -1}:", v.kind, "windings", v.values)
