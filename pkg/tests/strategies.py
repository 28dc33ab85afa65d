"""Hypothesis strategies shared by the property tests."""
from fractions import Fraction

from hypothesis import strategies as st

from fiberlab.exactpoly import ExactPoly, GaussianRational

XY = ("x", "y")
XYZ = ("x", "y", "z")

small_fracs = st.builds(Fraction, st.integers(-9, 9), st.integers(1, 6))
gaussians = st.builds(GaussianRational, small_fracs, small_fracs)


def polys(variables=XY, coeffs=small_fracs, max_terms=5, max_exp=3):
    n = len(variables)
    term = st.tuples(coeffs, st.tuples(*[st.integers(0, max_exp)] * n))
    return st.lists(term, max_size=max_terms).map(lambda ts: ExactPoly(variables, ts))


def points(n, values=small_fracs):
    return st.tuples(*[values] * n)
