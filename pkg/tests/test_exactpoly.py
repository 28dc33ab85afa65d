import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fiberlab.exactpoly import (
    ContextMismatch,
    EvenPowersNonnegCoeffs,
    ExactPoly,
    GaussianRational,
    PolyMap,
    ProductOf,
    RatFunc,
    SquareOf,
    SumOf,
    evaluate,
    evaluate_float,
    identity_witness_check,
    partial_derivative,
    poly_arith,
    substitute,
    verify_nonneg_certificate,
)
from fiberlab.fibermodel import complex_f, particular_f, particular_f_certificate, real_map
from fiberlab.polyparse import parse_poly
from strategies import XY, XYZ, gaussians, points, polys, small_fracs

ZL = ("z", "l")


# -- canonical form -----------------------------------------------------------------

def test_zero_coefficients_dropped_and_duplicates_merged():
    p = ExactPoly(XY, [(1, (1, 0)), (-1, (1, 0)), (2, (0, 1)), (3, (0, 1))])
    assert p.terms == ((Fraction(5), (0, 1)),)


def test_terms_sorted_graded_lex():
    p = parse_poly("1 + y + x + x*y + y^2 + x^2", XY)
    assert [e for _, e in p.terms] == [(2, 0), (1, 1), (0, 2), (1, 0), (0, 1), (0, 0)]


def test_rational_coefficients_normalized():
    p = ExactPoly(XY, {(0, 0): Fraction(6, -4)})
    c = p.constant_value()
    assert (c.numerator, c.denominator) == (-3, 2)


def test_gaussian_with_zero_imaginary_part_collapses_to_rational():
    p = ExactPoly(XY, {(1, 0): GaussianRational(Fraction(1, 2), 0)})
    assert p.field == "real"


def test_context_mismatch_is_an_error():
    with pytest.raises(ContextMismatch):
        poly_arith(ExactPoly.var(XY, "x"), ExactPoly.var(XYZ, "x"), "add")


def test_unknown_variable_in_derivative():
    with pytest.raises(KeyError):
        partial_derivative(ExactPoly.var(XY, "x"), "w")


# -- worked values --------------------------------------------------------------------

def test_difference_of_squares():
    x, _ = ExactPoly.gens(XY)
    assert poly_arith(x + 1, x - 1, "mul") == x * x - 1


def test_product_of_complex_factors_is_the_x_derivative():
    x, y, z, l = ExactPoly.gens(("x", "y", "z", "l"))
    first, second = y ** 2 + l * z - 1, l * y ** 2 + l ** 2 * z - l + 1
    assert complex_f().diff("x") == first * second
    assert l * first + 1 == second


def test_real_map_derivatives():
    F1 = real_map().components[0]
    x, y, z, l = ExactPoly.gens(F1.variables)
    f4 = particular_f().with_variables(F1.variables)
    assert F1.diff("x") == 2 * x
    assert F1.diff("y") == -1 + 2 * y * f4
    assert ExactPoly.constant(XY, 7).diff("x").is_zero()


def test_particular_f_expansion():
    f = particular_f()
    assert len(f.terms) == 6
    assert f.degree == 6
    z, l = ExactPoly.gens(ZL)
    assert f == (z ** 2 + l ** 2) * (l * z - 1) ** 2


def test_f_values():
    f = particular_f()
    assert evaluate(f, (0, 0)) == 0
    assert evaluate(f, (2, 1)) == 5
    at_one = substitute(f, {"z": ExactPoly.constant(ZL, 1)}).as_poly()
    _, l = ExactPoly.gens(ZL)
    assert at_one == (1 + l ** 2) * (l - 1) ** 2


def test_substitution_inverts_the_complex_chart():
    uvl = ("u", "v", "l")
    u, v, l = ExactPoly.gens(uvl)
    target = parse_poly("y^2 + l*z - 1", ("y", "z", "l"))
    z_img = RatFunc(v - u * u + 1, l)
    out = substitute(target, {"y": u, "z": z_img, "l": l})
    assert out.is_polynomial() and out.as_poly() == v


def test_substitute_zero_and_identity():
    F1 = real_map().components[0]
    x, y, z, l = ExactPoly.gens(F1.variables)
    f4 = particular_f().with_variables(F1.variables)
    out = substitute(F1, {"x": ExactPoly.zero(F1.variables)})
    assert out.as_poly() == -y + y * y * f4
    assert substitute(F1, {"x": x}).as_poly() == F1


def test_substitute_rejects_zero_denominator():
    x, y = ExactPoly.gens(XY)
    with pytest.raises(ZeroDivisionError):
        RatFunc(x, ExactPoly.zero(XY))


def test_ratfunc_cancels_exact_divisor():
    x, y = ExactPoly.gens(XY)
    r = RatFunc((x + y) * (x - y), x + y)
    assert r.is_polynomial() and r.as_poly() == x - y


def test_divide_exact():
    x, y = ExactPoly.gens(XY)
    assert ((x + 1) * (y - 2)).divide_exact(y - 2) == x + 1
    assert (x * x + 1).divide_exact(x + 1) is None


def test_gaussian_arithmetic():
    i = GaussianRational(0, 1)
    assert i * i == GaussianRational(-1, 0)
    a = GaussianRational(Fraction(1, 2), 3)
    assert a * a.conjugate() == GaussianRational(a.norm(), 0)
    assert (a / a) == GaussianRational(1, 0)


# -- witnesses -----------------------------------------------------------------------

def test_real_critical_witness():
    F1 = real_map().components[0]
    x, y, z, l = ExactPoly.gens(F1.variables)
    f4 = particular_f().with_variables(F1.variables)
    half = Fraction(1, 2)
    assert identity_witness_check(F1 + half * y, [x, 2 * y * f4 - 1], [x, half * y])
    assert not identity_witness_check(F1 + y, [x, 2 * y * f4 - 1], [x, half * y])


def test_complex_euler_witness():
    f = complex_f()
    x = ExactPoly.var(f.variables, "x")
    assert identity_witness_check(f, [f.diff("x")], [x])


def test_empty_witness():
    assert identity_witness_check(ExactPoly.zero(XY), [], [])
    assert not identity_witness_check(ExactPoly.constant(XY, 1), [], [])


def test_witness_length_mismatch():
    with pytest.raises(ValueError):
        identity_witness_check(ExactPoly.zero(XY), [ExactPoly.zero(XY)], [])


def _brute_force_witness(target, gens, cofs, pts):
    """Compare both sides at many exact points; a nonzero polynomial of low degree
    cannot vanish on a generic grid of this size."""
    for pt in pts:
        lhs = evaluate(target, pt)
        rhs = sum((evaluate(c, pt) * evaluate(g, pt) for g, c in zip(gens, cofs)), Fraction(0))
        if lhs != rhs:
            return False
    return True


_GRID = [(Fraction(a, 3), Fraction(b, 5)) for a in range(-7, 8) for b in range(-7, 8)]


@settings(max_examples=60, deadline=None)
@given(polys(), polys(), polys(), polys(), st.booleans())
def test_witness_matches_brute_force(g1, g2, c1, c2, consistent):
    target = c1 * g1 + c2 * g2
    if not consistent:
        target = target + ExactPoly(XY, {(1, 1): 1})
    assert identity_witness_check(target, [g1, g2], [c1, c2]) == _brute_force_witness(
        target, [g1, g2], [c1, c2], _GRID)


# -- certificates ---------------------------------------------------------------------

def test_particular_f_certificate_accepted():
    res = verify_nonneg_certificate(particular_f(), particular_f_certificate())
    assert res.ok and res.reason == "ok"


def test_certificate_leaves():
    z, l = ExactPoly.gens(ZL)
    assert verify_nonneg_certificate(z ** 2 + l ** 2, EvenPowersNonnegCoeffs(z ** 2 + l ** 2))
    assert verify_nonneg_certificate((l * z - 1) ** 2, SquareOf(l * z - 1))


def test_certificate_expansion_mismatch_is_distinct_from_structural_failure():
    z, l = ExactPoly.gens(ZL)
    wrong = verify_nonneg_certificate(z ** 2 + 2 * l ** 2, EvenPowersNonnegCoeffs(z ** 2 + l ** 2))
    assert not wrong and wrong.reason == "expansion"
    odd = verify_nonneg_certificate(z ** 3, EvenPowersNonnegCoeffs(z ** 3))
    assert not odd and odd.reason == "structural"
    neg = verify_nonneg_certificate(-(z ** 2), EvenPowersNonnegCoeffs(-(z ** 2)))
    assert not neg and neg.reason == "structural"


def test_certificate_rejects_complex_target():
    with pytest.raises(ValueError):
        p = parse_poly("x^2 + i", ("x",), "complex")
        verify_nonneg_certificate(p, SquareOf(p))


_cert_leaf = st.one_of(
    polys(ZL).map(SquareOf),
    polys(ZL, coeffs=st.builds(Fraction, st.integers(0, 9), st.integers(1, 6)), max_exp=1)
    .map(lambda p: EvenPowersNonnegCoeffs(ExactPoly(ZL, [(c, tuple(2 * k for k in e)) for c, e in p.terms]))),
)
_certs = st.recursive(_cert_leaf, lambda kids: st.one_of(
    st.lists(kids, min_size=1, max_size=3).map(lambda ks: SumOf(tuple(ks))),
    st.lists(kids, min_size=1, max_size=2).map(lambda ks: ProductOf(tuple(ks)))), max_leaves=4)


def _expand(cert):
    if isinstance(cert, SquareOf):
        return cert.poly * cert.poly
    if isinstance(cert, EvenPowersNonnegCoeffs):
        return cert.poly
    parts = [_expand(c) for c in cert.children]
    out = parts[0]
    for q in parts[1:]:
        out = out + q if isinstance(cert, SumOf) else out * q
    return out


@settings(max_examples=40, deadline=None)
@given(_certs)
def test_accepted_certificates_are_nonnegative_at_sample_points(cert):
    p = _expand(cert)
    assert verify_nonneg_certificate(p, cert)
    rng = np.random.default_rng(0)
    pts = rng.uniform(-3, 3, size=(10_000, 2))
    vals = p.to_numpy()(pts[:, 0], pts[:, 1]) if not p.is_zero() else np.zeros(1)
    scale = max(1.0, float(np.max(np.abs(vals))))
    assert float(np.min(vals)) >= -1e-12 * scale


# -- ring and derivative properties ----------------------------------------------------

@settings(max_examples=80, deadline=None)
@given(polys(), polys(), polys())
def test_ring_axioms(a, b, c):
    assert (a + b) + c == a + (b + c)
    assert a * (b + c) == a * b + a * c
    assert a * b == b * a
    assert a - a == ExactPoly.zero(XY)
    assert a * ExactPoly.constant(XY, 1) == a


@settings(max_examples=60, deadline=None)
@given(polys(XY, gaussians), polys(XY, gaussians), polys(XY, gaussians))
def test_ring_axioms_gaussian(a, b, c):
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c


@settings(max_examples=80, deadline=None)
@given(polys(XYZ), polys(XYZ), st.sampled_from(XYZ))
def test_leibniz_rule(a, b, v):
    assert (a * b).diff(v) == a.diff(v) * b + a * b.diff(v)


@settings(max_examples=80, deadline=None)
@given(polys(), polys(), points(2))
def test_evaluation_is_multiplicative_exactly(a, b, pt):
    assert evaluate(a * b, pt) == evaluate(a, pt) * evaluate(b, pt)


@settings(max_examples=80, deadline=None)
@given(polys(), polys(), st.tuples(st.floats(-3, 3), st.floats(-3, 3)))
def test_evaluation_is_multiplicative_in_floating_point(a, b, pt):
    ab, bound = evaluate_float(a * b, pt)
    va, vb = evaluate_float(a, pt)[0], evaluate_float(b, pt)[0]
    scale = max(abs(va * vb), bound, 1e-300)
    assert abs(ab - va * vb) <= 1e-12 * scale + 4 * bound


@settings(max_examples=60, deadline=None)
@given(polys(), points(2))
def test_float_error_bound_holds(p, pt):
    exact = evaluate(p, pt)
    val, bound = evaluate_float(p, [float(v) for v in pt])
    # the float rounding of the inputs themselves adds a relative 2^-53 per factor
    slack = 16 * np.finfo(float).eps * sum(abs(float(evaluate(ExactPoly(XY, [(abs(c), e)]), [abs(v) for v in pt])))
                                           for c, e in p.terms)
    assert abs(val - float(exact)) <= bound + slack


def test_evaluate_arity_mismatch():
    with pytest.raises(ValueError):
        evaluate(ExactPoly.var(XY, "x"), (1,))


def test_evaluate_complex_field():
    p = parse_poly("x^2 + 1", ("x",), "complex")
    assert evaluate(p, (GaussianRational(0, 1),), "complex") == 0
    assert math.isclose(abs(evaluate(p, (1j,), "complex")), 0.0, abs_tol=1e-15)


def test_polymap_shared_context():
    with pytest.raises(ContextMismatch):
        PolyMap([ExactPoly.var(XY, "x"), ExactPoly.var(XYZ, "x")])

