import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fiberlab.exactpoly import ExactPoly, GaussianRational, PolyMap, evaluate
from fiberlab.fibermodel import (
    FiberPoint4,
    ModelPointK,
    PunctureError,
    RealScenarioParams,
    alpha_array,
    alpha_branches,
    alpha_positive_root,
    case1_fiber_param,
    complex_f,
    complex_fiber_residual,
    complex_map,
    complex_model_cloud,
    fiber_to_model_real,
    fiber_to_model_real_array,
    g_complex,
    gurjar_fiber_sheets,
    h_complex,
    h_complex_array,
    model_to_fiber_real,
    model_to_fiber_real_array,
    particular_f,
    puncture_heights,
    real_cloud_to_fibers,
    real_fiber_residual,
    real_map,
    real_model_cloud,
    submersion_sample_report,
)


def bisection_root(theta, a, b, lam, iters=200):
    """Positive root of (u^2 + v^2 f) xi^2 - v xi - b with (u, v) = (cos, sin)."""
    u, v = math.cos(theta), math.sin(theta)
    fa = (a * a + lam * lam) * (lam * a - 1) ** 2
    A = u * u + v * v * fa

    def g(xi):
        return A * xi * xi - v * xi - b
    lo, hi = 0.0, 1.0
    while g(hi) < 0:
        hi *= 2
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        lo, hi = (mid, hi) if g(mid) < 0 else (lo, mid)
    return 0.5 * (lo + hi)


# -- scaling root --------------------------------------------------------------

def test_alpha_is_b_at_the_degenerate_point():
    for lam in (0.5, -0.25, 0.0):
        a0 = puncture_heights(lam).values[0]
        for b in (0.5, 1.0, 2.7):
            assert abs(alpha_positive_root(ModelPointK(0.0, -1.0, a0), RealScenarioParams(b, lam)) - b) <= 1e-12


def test_alpha_on_the_u_axis_is_sqrt_b():
    assert alpha_positive_root(ModelPointK(1.0, 0.0, 3.0), RealScenarioParams(1.0, 0.2)) == pytest.approx(1.0, abs=1e-15)
    assert alpha_positive_root(ModelPointK(1.0, 0.0, 3.0), RealScenarioParams(4.0, 0.2)) == pytest.approx(2.0, abs=1e-15)


def test_alpha_matches_bisection_at_angle_one():
    m = ModelPointK(math.cos(1), math.sin(1), 1.0)
    assert abs(alpha_positive_root(m, RealScenarioParams(1.0, 0.3)) - bisection_root(1.0, 1.0, 1.0, 0.3)) <= 1e-12


@pytest.mark.parametrize("lam", [0.3, 0.1, 0.0, -0.4])
def test_alpha_matches_bisection_on_the_unit_height_loop(lam):
    theta = 2 * np.pi * np.arange(1024) / 1024
    al = alpha_array(np.cos(theta), np.sin(theta), np.ones_like(theta), RealScenarioParams(1.0, lam))
    oracle = np.array([bisection_root(t, 1.0, 1.0, lam) for t in theta])
    assert np.max(np.abs(al - oracle)) <= 1e-10


def test_alpha_at_zero_lambda_has_closed_form():
    theta = 2 * np.pi * np.arange(256) / 256
    al = alpha_array(np.cos(theta), np.sin(theta), np.ones_like(theta), RealScenarioParams(1.0, 0.0))
    closed = (np.sin(theta) + np.sqrt(np.sin(theta) ** 2 + 4)) / 2
    assert np.max(np.abs(al - closed)) <= 1e-14


def test_alpha_branches_agree_where_both_defined():
    cloud = real_model_cloud(4000)
    for lam in (-0.5, 0.0, 0.3):
        p = RealScenarioParams(1.3, lam)
        plus, conj, lead = alpha_branches(cloud[:, 0], cloud[:, 1], cloud[:, 2], p)
        ok = (np.abs(2 * lead) > 1e-6) & np.isfinite(conj)
        assert np.max(np.abs(plus[ok] - conj[ok]) / np.maximum(1, np.abs(conj[ok]))) <= 1e-9


def test_alpha_is_continuous_through_the_degenerate_point():
    lam = 0.5
    a0 = puncture_heights(lam).values[0]
    theta = -np.pi / 2 + np.linspace(-1e-3, 1e-3, 2001)
    al = alpha_array(np.cos(theta), np.sin(theta), np.full_like(theta, a0), RealScenarioParams(1.0, lam))
    # steps are 1e-6 in angle; a jump would show up as a step far above the smooth slope
    assert np.max(np.abs(np.diff(al))) <= 1e-8


def test_alpha_rejects_puncture_and_bad_b():
    with pytest.raises(PunctureError):
        alpha_positive_root(ModelPointK(0.0, 1.0, 2.0), RealScenarioParams(1.0, 0.5))
    with pytest.raises(ValueError):
        RealScenarioParams(0.0, 0.5)


def test_alpha_warns_near_puncture():
    with pytest.warns(UserWarning):
        alpha_positive_root(ModelPointK(0.0, 1.0, 2.0 + 1e-5), RealScenarioParams(1.0, 0.5))


# -- real model maps ------------------------------------------------------------

def test_model_to_fiber_examples():
    p = model_to_fiber_real(ModelPointK(0.0, -1.0, 2.0), RealScenarioParams(1.0, 0.5))
    assert p.as_tuple() == pytest.approx((0.0, -1.0, 2.0, 0.5), abs=1e-15)
    q = model_to_fiber_real(ModelPointK(1.0, 0.0, 0.0), RealScenarioParams(1.0, 0.0))
    assert q.as_tuple() == pytest.approx((1.0, 0.0, 0.0, 0.0), abs=1e-15)
    m = ModelPointK(math.cos(math.pi / 3), math.sin(math.pi / 3), 1.0)
    r = model_to_fiber_real(m, RealScenarioParams(1.0, 0.1))
    F1 = real_map()[0]
    exact = evaluate(F1, [Fraction(v) for v in r.as_tuple()])
    assert abs(float(exact) - 1.0) < 1e-9


def test_fiber_to_model_examples():
    m = fiber_to_model_real(FiberPoint4(0.0, -1.0, 2.0, 0.5))
    assert (m.u, m.v, m.a) == pytest.approx((0.0, -1.0, 2.0))
    m = fiber_to_model_real(FiberPoint4(3.0, 4.0, 2.0, 0.1))
    assert (m.u, m.v, m.a) == pytest.approx((0.6, 0.8, 2.0), abs=1e-15)
    with pytest.raises(ValueError):
        fiber_to_model_real(FiberPoint4(0.0, 0.0, 1.0, 0.1))


def test_model_point_must_be_on_the_cylinder():
    with pytest.raises(ValueError):
        ModelPointK(1.0, 0.1, 0.0)


def test_cloud_round_trip_and_residual():
    cloud = real_model_cloud(10_000)
    pts = real_cloud_to_fibers(cloud)
    assert np.max(real_fiber_residual(pts, cloud[:, 3])) <= 1e-9
    back = fiber_to_model_real_array(pts)
    assert np.max(np.abs(back - cloud[:, :3])) <= 1e-9


@settings(max_examples=60, deadline=None)
@given(st.floats(0, 2 * math.pi), st.floats(-3, 3), st.floats(0.5, 2), st.floats(-0.5, 0.5))
def test_round_trip_property(theta, a, b, lam):
    p = RealScenarioParams(b, lam)
    uva = np.array([math.cos(theta), math.sin(theta), a])
    lead = uva[0] ** 2 + uva[1] ** 2 * float(p.f_at(a))
    if uva[1] > 0 and lead < 1e-6:
        return
    pt = model_to_fiber_real_array(uva, p)
    assert real_fiber_residual(pt, b)[0] <= 1e-9
    back = fiber_to_model_real_array(pt)
    assert np.max(np.abs(back - uva)) <= 1e-9
    # image never sits at a puncture
    a0s = puncture_heights(lam).values
    assert all(np.hypot(back[0], back[1] - 1) + abs(back[2] - a0) > 1e-6 for a0 in a0s)


def test_puncture_heights():
    assert puncture_heights(0.5).values == (2.0,)
    assert puncture_heights(0.0).values == (0.0,)
    assert puncture_heights(-0.25).values == (-4.0,)


def test_puncture_heights_for_a_general_polynomial():
    z, l = ExactPoly.gens(("z", "l"))
    g = (z - 3) ** 2 * (z ** 2 + 1) + 0 * l
    assert puncture_heights(0.7, g).values == pytest.approx((3.0,), abs=1e-12)


# -- complex model --------------------------------------------------------------

def test_h_complex_example():
    x, y, z, l = h_complex(0, 1, 1, 2)
    assert (x, y, z, l) == (1, 0, 2, 1)
    assert evaluate(complex_f(), (1, 0, 2, 1)) == 2
    assert g_complex(1, 0, 2, 1) == (0, 1)


def test_h_complex_rejects_punctures():
    with pytest.raises(PunctureError):
        h_complex(0.3, 0.0, 0.5, 1.0)
    with pytest.raises(PunctureError):
        h_complex(0.3, -2.0, 0.5, 1.0)
    assert g_complex(5, 0, Fraction(1, 3), 3) == (0, 0)


def test_case1_parametrization():
    assert case1_fiber_param(0, 0, 1) == (-1, 0, 0, 0)
    assert case1_fiber_param(2, 5, 3) == (1, 2, 5, 0)
    with pytest.raises(PunctureError):
        case1_fiber_param(1, 0, 1)


def test_complex_cloud_round_trip():
    u, v, lam, b = complex_model_cloud(10_000)
    pts = h_complex_array(u, v, lam, b)
    assert np.max(complex_fiber_residual(pts, b)) <= 1e-9
    y, w = g_complex(*pts.T)
    assert np.max(np.abs(y - u)) <= 1e-12 and np.max(np.abs(w - v)) <= 1e-9


_q = st.builds(Fraction, st.integers(-40, 40), st.integers(1, 9))
_gq = st.builds(GaussianRational, _q, _q)


@settings(max_examples=60, deadline=None)
@given(_gq, _gq, _gq, _gq)
def test_complex_round_trip_is_exact_on_rationals(u, v, lam, b):
    if lam == 0 or b == 0 or v == 0 or lam * v + 1 == 0:
        return
    pt = h_complex(u, v, lam, b)
    assert g_complex(*pt) == (u, v)
    assert evaluate(complex_f(), pt, "complex") == b


# -- two-sheet example ------------------------------------------------------------

def test_gurjar_two_sheets_near_origin():
    ys = np.linspace(-2, 2, 10) + 1j * np.linspace(1, -1, 10)[:, None]
    for x0, t in ((0.05, 0.0), (-0.08 + 0.01j, 0.05), (0.1j, -0.03)):
        s = gurjar_fiber_sheets(x0, t)
        assert s.degenerate is None and len(s.roots) == 2
        assert s.residual(ys.ravel()) <= 1e-9
        oracle = np.roots([x0 * (x0 - 1), 1, -(1 + t)])
        assert np.allclose(sorted(s.roots, key=lambda w: (w.real, w.imag)),
                           sorted(oracle, key=lambda w: (w.real, w.imag)), rtol=1e-9)


def test_gurjar_degenerate():
    assert gurjar_fiber_sheets(0, 0.1).degenerate
    assert gurjar_fiber_sheets(1, 0.1).degenerate


# -- submersion sampling -------------------------------------------------------------

def test_real_map_submersion_on_cloud():
    cloud = real_model_cloud(10_000)
    pts = real_cloud_to_fibers(cloud)
    targets = np.column_stack([cloud[:, 3], cloud[:, 4]])
    rep = submersion_sample_report(real_map(), pts, "real", targets)
    assert rep.full_rank and rep.min_singular_value > 1e-6


def test_complex_map_submersion_on_cloud():
    u, v, lam, b = complex_model_cloud(10_000)
    pts = h_complex_array(u, v, lam, b)
    rep = submersion_sample_report(complex_map(), pts, "complex", np.column_stack([b, lam]))
    assert rep.full_rank


def test_constant_map_has_zero_singular_value():
    F = PolyMap([ExactPoly.constant(("x", "y"), 3), ExactPoly.constant(("x", "y"), 1)])
    rep = submersion_sample_report(F, np.array([[0.0, 1.0], [2.0, 3.0]]))
    assert rep.min_singular_value == 0 and not rep.full_rank and rep.argmin_index == 0


def test_submersion_rejects_empty_and_off_fiber_points():
    with pytest.raises(ValueError):
        submersion_sample_report(real_map(), np.empty((0, 4)))
    with pytest.raises(ValueError):
        submersion_sample_report(real_map(), np.array([[0.0, 0.0, 0.0, 0.0]]), targets=[[1.0, 0.0]])
