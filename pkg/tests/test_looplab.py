import csv
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fiberlab.fibermodel import complex_fiber_residual, puncture_heights, real_fiber_residual
from fiberlab.looplab import (
    CylinderDomain,
    DiscreteLoop,
    HomotopyVerdict,
    LoopTooCloseError,
    PuncturedPlane,
    UndersampledLoopError,
    complex_limit_loop,
    complex_model_loop,
    cylinder_to_plane,
    homotopy_verdict,
    loop_from_function,
    pushforward_loop,
    sample_model_loop,
    straight_line_homotopy_certify,
    sup_distance,
    winding_number,
)


def circle(center=0j, radius=1.0, n=1024, turns=1):
    return loop_from_function(lambda t: center + radius * np.exp(1j * turns * t), n, "circle")


def angle_oracle(z, c, refine=16):
    """Winding by summing unwrapped angles of a finer resampling of the same polygon."""
    w = np.asarray(z) - c
    nxt = np.roll(w, -1)
    s = np.linspace(0, 1, refine, endpoint=False)
    fine = (w[:, None] * (1 - s) + nxt[:, None] * s).ravel()
    ang = np.unwrap(np.angle(np.append(fine, fine[0])))
    return (ang[-1] - ang[0]) / (2 * np.pi)


# -- loops ----------------------------------------------------------------------

def test_quarter_points_and_heights():
    g = sample_model_loop("gamma", 16)
    quarters = g.samples[::4]
    assert np.allclose(quarters, [(1, 0, 1), (0, 1, 1), (-1, 0, 1), (0, -1, 1)], atol=1e-15)
    gt = sample_model_loop("gamma_tilde", 1024)
    assert np.all(gt.samples[:, 2] == -1)
    assert np.max(np.abs(g.samples[:, 0] ** 2 + g.samples[:, 1] ** 2 - 1)) <= 1e-15


def test_minimum_sample_count():
    with pytest.raises(ValueError):
        sample_model_loop("gamma", 8)
    with pytest.raises(ValueError):
        DiscreteLoop(np.zeros((15, 2)))


def test_loops_are_immutable():
    g = sample_model_loop("gamma", 16)
    with pytest.raises(ValueError):
        g.samples[0, 0] = 3.0


def test_csv_export(tmp_path):
    path = tmp_path / "loop.csv"
    complex_limit_loop(1, 1.0, 32).to_csv(path)
    rows = list(csv.reader(open(path)))
    assert rows[0] == ["theta", "re0", "im0", "re1", "im1", "re2", "im2", "re3", "im3"]
    assert len(rows) == 33
    assert float(rows[1][3]) == pytest.approx(2.0)


# -- winding ------------------------------------------------------------------------

def test_unit_circle_winds_once():
    assert winding_number(circle(), 0) == 1
    assert winding_number(circle(turns=-2), 0) == -2
    assert winding_number(circle(), 3) == 0


def test_limit_loop_windings():
    mu1 = complex_limit_loop(1, 1.0, 4096).coordinate(1)
    assert winding_number(mu1, -1) == 0
    assert winding_number(mu1, 1) == 1


def test_equal_windings_around_zero():
    for s in (2, -2):
        loop = loop_from_function(lambda t: np.exp(1j * t) * (np.exp(1j * t) + s), 1024)
        assert winding_number(loop, 0) == 1


def test_winding_refuses_near_center_and_undersampling():
    with pytest.raises(LoopTooCloseError):
        winding_number(circle(), 1.0)
    with pytest.raises(UndersampledLoopError):
        winding_number(circle(n=16, turns=5), 0)


@pytest.mark.parametrize("loop", [
    circle(0.3 + 0.1j, 2.0),
    complex_limit_loop(1).coordinate(1),
    complex_limit_loop(2).coordinate(1),
    complex_limit_loop(1).coordinate(0),
    cylinder_to_plane(sample_model_loop("gamma")),
    cylinder_to_plane(sample_model_loop("gamma_tilde")),
], ids=["circle", "mu1", "mu2", "x-limit", "gamma", "gamma-tilde"])
@pytest.mark.parametrize("center", [0j, 1j, 1, -1, 0.5 - 0.2j])
def test_winding_matches_angle_oracle_and_refinement(loop, center):
    try:
        k = winding_number(loop, center)
    except LoopTooCloseError:
        return
    assert k == round(angle_oracle(loop.planar(), center))
    # n vs 2n: the closed forms are re-sampled at twice the density
    z = loop.planar()
    mid = (z + np.roll(z, -1)) / 2
    dense = DiscreteLoop(np.column_stack([z, mid]).ravel())
    assert winding_number(dense, center) == k


@settings(max_examples=100, deadline=None)
@given(st.floats(-2, 2), st.floats(-2, 2), st.floats(0.5, 3), st.floats(0.5, 3),
       st.floats(-1.5, 1.5), st.floats(-1.5, 1.5), st.floats(-3, 3), st.floats(-3, 3))
def test_winding_unchanged_by_certified_homotopy(x1, y1, r1, r2, dx, dy, cx, cy):
    a = circle(complex(x1, y1), r1, 256)
    b = circle(complex(x1 + dx, y1 + dy), r2, 256)
    c = complex(cx, cy)
    v = straight_line_homotopy_certify(a, b, PuncturedPlane((c,)), margin=1e-3)
    if v.kind == "Equivalent":
        assert winding_number(a, c) == winding_number(b, c)
    assert v.kind != "Distinct"


# -- distances ------------------------------------------------------------------------

def test_sup_distance_basic():
    g = sample_model_loop("gamma", 64)
    assert sup_distance(g, g) == 0
    gt = sample_model_loop("gamma_tilde", 64)
    assert sup_distance(g, gt) == pytest.approx(2.0)
    with pytest.raises(ValueError):
        sup_distance(g, sample_model_loop("gamma", 128))


_loop_coeffs = st.lists(st.floats(-2, 2), min_size=4, max_size=4)


@settings(max_examples=100, deadline=None)
@given(_loop_coeffs, _loop_coeffs, _loop_coeffs)
def test_sup_distance_triangle_inequality(p, q, r):
    def make(c):
        return loop_from_function(lambda t: np.stack([c[0] + c[1] * np.cos(t), c[2] + c[3] * np.sin(2 * t)], 1), 64)
    a, b, c = make(p), make(q), make(r)
    assert sup_distance(a, c) <= sup_distance(a, b) + sup_distance(b, c) + 1e-12


def test_real_pushforward_converges_uniformly():
    g = sample_model_loop("gamma")
    g0 = pushforward_loop(g, "real", 0.0)
    theta = g.theta
    alpha0 = (np.sin(theta) + np.sqrt(np.sin(theta) ** 2 + 4)) / 2
    assert np.allclose(g0.samples[:, 0], np.cos(theta) * alpha0, atol=1e-14)
    d = [sup_distance(pushforward_loop(g, "real", lam), g0) for lam in (1e-1, 1e-2, 1e-3, 1e-4)]
    assert all(x > y for x, y in zip(d, d[1:])) and d[-1] < 1e-3


def test_complex_pushforward_converges_to_closed_form():
    for which in (1, 2):
        loop = complex_model_loop(which)
        img = pushforward_loop(loop, "complex", 1e-2)
        assert np.max(np.abs(img.samples[:, 2])) <= 1e-12
        assert sup_distance(img, complex_limit_loop(which)) < 0.05
        d = [sup_distance(pushforward_loop(loop, "complex", lam), complex_limit_loop(which))
             for lam in (1e-1, 1e-2, 1e-3, 1e-4)]
        assert all(x > y for x, y in zip(d, d[1:])) and d[-1] < 1e-3


def test_pushforwards_stay_on_fibers():
    for lam in (0.5, -0.5, 0.1, 0.0):
        img = pushforward_loop(sample_model_loop("gamma_tilde"), "real", lam)
        assert np.max(real_fiber_residual(img.samples, 1.0)) <= 1e-9
    img = pushforward_loop(complex_model_loop(1), "complex", 0.2, 1.5)
    assert np.max(complex_fiber_residual(img.samples, 1.5)) <= 1e-9


def test_pushforward_rejects_punctures():
    bad = loop_from_function(lambda t: np.stack([np.cos(t), np.sin(t), np.full_like(t, 2.0)], 1), 16)
    with pytest.raises(ValueError):
        pushforward_loop(bad, "real", 0.5)  # theta = pi/2 hits (0, 1, 2)


# -- cylinder and verdicts ---------------------------------------------------------------

def test_cylinder_to_plane():
    assert cylinder_to_plane((1, 0, 0)) == 1
    assert cylinder_to_plane((0, 1, 0)) == pytest.approx(1j)
    ring = cylinder_to_plane(sample_model_loop("gamma"))
    assert np.allclose(np.abs(ring.planar()), math.e)
    with pytest.raises(ValueError):
        cylinder_to_plane((1, 1, 0))
    assert CylinderDomain((0.0,)).plane().punctures == (0j, 1j)


@pytest.mark.parametrize("lam", [0.5, -0.5, 0.1, -0.1])
def test_real_loops_equivalent_for_nonzero_lambda(lam):
    dom = CylinderDomain(tuple(puncture_heights(lam)))
    v = homotopy_verdict(dom, sample_model_loop("gamma"), sample_model_loop("gamma_tilde"))
    assert v.kind == "Equivalent" and v.margin > 0.1


def test_real_loops_distinct_at_zero():
    dom = CylinderDomain(tuple(puncture_heights(0.0)))
    g, gt = sample_model_loop("gamma"), sample_model_loop("gamma_tilde")
    v = homotopy_verdict(dom, g, gt)
    assert v.kind == "Distinct"
    k = dom.plane().punctures.index(1j)
    assert (v.values[0][k], v.values[1][k]) == (1, 0)
    s = straight_line_homotopy_certify(g, gt, dom)
    assert s.kind == "Inconclusive"


def test_limit_loops_distinct_in_twice_punctured_plane():
    mu1 = complex_limit_loop(1).coordinate(1)
    mu2 = complex_limit_loop(2).coordinate(1)
    v = homotopy_verdict(PuncturedPlane((1, -1)), mu1, mu2)
    assert v.kind == "Distinct" and v.values == ((1, 0), (0, 1))


def test_loop_against_itself_is_equivalent_with_its_clearance():
    mu1 = complex_limit_loop(1).coordinate(1)
    v = homotopy_verdict(PuncturedPlane((1, -1)), mu1, mu1)
    assert v.kind == "Equivalent"
    assert v.margin == pytest.approx(1.0, abs=0.01)  # mu1 is the unit circle around 1


def test_verdict_invariants():
    with pytest.raises(ValueError):
        HomotopyVerdict("Distinct", values=(1, 1))
    with pytest.raises(ValueError):
        HomotopyVerdict("Equivalent", margin=0.0)
    with pytest.raises(ValueError):
        straight_line_homotopy_certify(circle(), circle(), PuncturedPlane(), margin=0)
    with pytest.raises(ValueError):
        PuncturedPlane((1, 1))


def test_winding_invariance_on_one_hundred_certified_pairs():
    rng = np.random.default_rng(11)
    certified = 0
    while certified < 100:
        c1, c2, c = rng.uniform(-2, 2, 3) + 1j * rng.uniform(-2, 2, 3)
        a, b = circle(c1, rng.uniform(0.5, 3), 256), circle(c2, rng.uniform(0.5, 3), 256)
        if straight_line_homotopy_certify(a, b, PuncturedPlane((c,))).kind == "Equivalent":
            certified += 1
            assert winding_number(a, c) == winding_number(b, c)
