"""Explicit fiber models for the two special bifurcation examples.

Real case: ``F(x, y, z, l) = (x^2 - y + y^2 f(z, l), l)`` with ``f >= 0``.
For ``b > 0`` the fiber over ``(b, l)`` is diffeomorphic to the unit
cylinder ``{u^2 + v^2 = 1} x R`` with the points ``(0, 1, a0)``,
``f(a0, l) = 0``, removed.  ``model_to_fiber_real`` scales the circle
point by the positive root ``alpha`` of

    (u^2 + v^2 f(a, l)) xi^2 - v xi - b = 0,

and ``fiber_to_model_real`` normalizes ``(x, y)`` back onto the circle.

Complex case: ``f(x, y, z, l) = x (y^2 + l z - 1)(l y^2 + l^2 z - l + 1)``
and ``F = (f, l)``.  For ``l != 0`` the fiber over ``(b, l)`` is
parametrized by ``(u, v) -> (b / (v (l v + 1)), u, (v - u^2 + 1) / l, l)``
on ``C x (C minus {0, -1/l})``; for ``l = 0`` by separating ``x``.
"""
from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .exactpoly import ExactPoly, PolyMap
from .tolerances import CYLINDER_TOL, FIBER_RESIDUAL, PUNCTURE_HARD, PUNCTURE_WARN, RANK_THRESHOLD
from . import univariate as uv

ZL = ("z", "l")
XYZL = ("x", "y", "z", "l")


class PunctureError(ValueError):
    """The requested point is (numerically) an excluded puncture."""


class RootFindingError(RuntimeError):
    pass


# -- the polynomials ---------------------------------------------------------

def particular_f() -> ExactPoly:
    """``f(z, l) = (z^2 + l^2)(l z - 1)^2`` over ``(z, l)``."""
    z, l = ExactPoly.gens(ZL)
    return (z ** 2 + l ** 2) * (l * z - 1) ** 2


def particular_f_certificate():
    """Nonnegativity certificate for :func:`particular_f`."""
    from .exactpoly import EvenPowersNonnegCoeffs, ProductOf, SquareOf
    z, l = ExactPoly.gens(ZL)
    return ProductOf((EvenPowersNonnegCoeffs(z ** 2 + l ** 2), SquareOf(l * z - 1)))


def real_map(f: ExactPoly | None = None) -> PolyMap:
    f = particular_f() if f is None else f
    x, y, z, l = ExactPoly.gens(XYZL)
    f4 = f.with_variables(XYZL)
    return PolyMap([x ** 2 - y + y ** 2 * f4, l])


def complex_f() -> ExactPoly:
    x, y, z, l = ExactPoly.gens(XYZL)
    return x * (y ** 2 + l * z - 1) * (l * y ** 2 + l ** 2 * z - l + 1)


def complex_map() -> PolyMap:
    l = ExactPoly.var(XYZL, "l")
    return PolyMap([complex_f(), l])


def gurjar_map() -> PolyMap:
    """``(x, [(x - 1) w + 1][x w - 1])`` with ``w = x z + y^2``, over ``(x, y, z)``."""
    x, y, z = ExactPoly.gens(("x", "y", "z"))
    w = x * z + y ** 2
    return PolyMap([x, ((x - 1) * w + 1) * (x * w - 1)])


# -- real model ---------------------------------------------------------------

@dataclass(frozen=True)
class RealScenarioParams:
    b: float
    lam: float
    f: ExactPoly = field(default_factory=particular_f)

    def __post_init__(self):
        if not self.b > 0:
            raise ValueError(f"b must be positive (the target must lie in U), got {self.b}")
        if self.f.variables != ZL:
            raise ValueError(f"f must be a polynomial in {ZL}, got {self.f.variables}")

    def f_at(self, a):
        return self.f.to_numpy()(a, self.lam)


@dataclass(frozen=True)
class ModelPointK:
    u: float
    v: float
    a: float

    def __post_init__(self):
        if abs(self.u * self.u + self.v * self.v - 1.0) > CYLINDER_TOL:
            raise ValueError(f"({self.u}, {self.v}) is not on the unit circle")


@dataclass(frozen=True)
class FiberPoint4:
    x: complex | float
    y: complex | float
    z: complex | float
    lam: complex | float

    def as_tuple(self):
        return (self.x, self.y, self.z, self.lam)


@dataclass(frozen=True)
class PunctureSet:
    values: tuple

    def __len__(self):
        return len(self.values)

    def __iter__(self):
        return iter(self.values)


def _alpha_forms(u, v, a, b, lam, f: ExactPoly):
    """Both closed forms of the positive root; NaN where a form is undefined."""
    u, v, a = (np.asarray(w, dtype=float) for w in (u, v, a))
    fa = f.to_numpy()(a, lam)
    lead = u * u + v * v * fa
    root = np.sqrt(v * v + 4.0 * b * lead)
    with np.errstate(divide="ignore", invalid="ignore"):
        plus_form = np.where(lead != 0, (v + root) / (2.0 * lead), np.nan)
        den = root - v
        conj_form = np.where(den != 0, 2.0 * b / den, np.nan)
    return plus_form, conj_form, lead


def alpha_branches(u, v, a, params: RealScenarioParams):
    """``(plus_form, conjugate_form, leading_coefficient)`` arrays."""
    return _alpha_forms(u, v, a, params.b, params.lam, params.f)


def alpha_array(u, v, a, params: RealScenarioParams) -> np.ndarray:
    """Vectorized positive root, choosing the well-conditioned form by sign of ``v``.

    For ``v <= 0`` the conjugate form ``2b / (sqrt(...) - v)`` has a
    denominator ``>= sqrt(v^2 + 4b lead) > 0``; for ``v > 0`` the
    ``(v + sqrt(...)) / (2 lead)`` form has no cancellation.
    """
    b = params.b
    if not b > 0:
        raise ValueError("b must be positive")
    u, v, a = (np.asarray(w, dtype=float) for w in (u, v, a))
    fa = params.f.to_numpy()(a, params.lam)
    lead = u * u + v * v * fa
    near = (v > 0) & (np.abs(lead) <= PUNCTURE_HARD)
    if np.any(near):
        raise PunctureError("model point is an excluded puncture (0, 1, a0) with f(a0, l) = 0")
    if np.any((v > 0) & (np.abs(lead) <= PUNCTURE_WARN)):
        warnings.warn("model point within 1e-6 of a puncture; alpha is ill-conditioned", stacklevel=2)
    root = np.sqrt(v * v + 4.0 * b * lead)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(v > 0, (v + root) / (2.0 * np.where(lead == 0, 1.0, lead)), 2.0 * b / (root - v))
    return out


def alpha_positive_root(m: ModelPointK, params: RealScenarioParams) -> float:
    return float(alpha_array(m.u, m.v, m.a, params))


def model_to_fiber_real_array(uva: np.ndarray, params: RealScenarioParams) -> np.ndarray:
    uva = np.asarray(uva, dtype=float)
    al = alpha_array(uva[..., 0], uva[..., 1], uva[..., 2], params)
    return np.stack([uva[..., 0] * al, uva[..., 1] * al, uva[..., 2],
                     np.full_like(al, params.lam)], axis=-1)


def model_to_fiber_real(m: ModelPointK, params: RealScenarioParams) -> FiberPoint4:
    al = alpha_positive_root(m, params)
    return FiberPoint4(m.u * al, m.v * al, m.a, params.lam)


def fiber_to_model_real_array(xyzl: np.ndarray) -> np.ndarray:
    xyzl = np.asarray(xyzl, dtype=float)
    r = np.hypot(xyzl[..., 0], xyzl[..., 1])
    if np.any(r <= PUNCTURE_HARD):
        raise ValueError("(x, y) is numerically at the origin; the point is not on a fiber with b > 0")
    return np.stack([xyzl[..., 0] / r, xyzl[..., 1] / r, xyzl[..., 2]], axis=-1)


def fiber_to_model_real(p: FiberPoint4, params: RealScenarioParams | None = None) -> ModelPointK:
    u, v, a = fiber_to_model_real_array(np.array([p.x, p.y, p.z, p.lam], dtype=float))
    return ModelPointK(float(u), float(v), float(a))


def real_fiber_residual(points: np.ndarray, b, f: ExactPoly | None = None) -> np.ndarray:
    """``|F_1(point) - b|`` per point; ``b`` may be a scalar or one value per point.

    Terms are formed in floating point and summed with ``math.fsum`` per
    point, so the residual reflects the point rather than the summation.
    The second component of ``F`` is ``l`` itself and is exact.
    """
    F1 = real_map(f)[0]
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    b = np.broadcast_to(np.asarray(b, dtype=float), (len(pts),))
    cols = np.empty((len(pts), len(F1) + 1))
    for k, (c, e) in enumerate(F1.terms):
        term = np.full(len(pts), float(c))
        for i, p in enumerate(e):
            if p:
                term = term * pts[:, i] ** p
        cols[:, k] = term
    cols[:, -1] = -b
    return np.abs(np.array([math.fsum(row) for row in cols]))


def puncture_heights(lam: float, f: ExactPoly | None = None,
                     interval: tuple[float, float] = (-1e6, 1e6)) -> PunctureSet:
    """Real zeros of ``z -> f(z, lam)`` on ``interval``.

    The zeros of a nonnegative ``f`` have even multiplicity, so plain sign
    changes never see them.  Closed-form candidates of the particular
    ``f`` (``1/lam``, or ``0`` when ``lam = 0``) are deflated out first;
    what remains is searched by sign-change bisection on the exact
    squarefree part, which does detect even-multiplicity zeros.
    """
    f = particular_f() if f is None else f
    lam_q = Fraction(repr(float(lam))) if isinstance(lam, float) else Fraction(lam)
    g = [Fraction(0)] * (f.degree_in("z") + 1)
    for c, (ez, el) in f.terms:
        g[ez] += c * lam_q ** el
    g = uv.trim(g)
    lo, hi = (Fraction(repr(float(w))) for w in interval)
    if not g:
        raise RootFindingError(f"f(., {lam}) vanishes identically")
    roots: list[float] = []
    if f == particular_f():
        cand = Fraction(0) if lam_q == 0 else 1 / lam_q
        lin = [-cand, Fraction(1)]
        deflated = False
        while len(g) > 1:
            q, r = uv.divmod_(g, lin)
            if r:
                break
            g, deflated = q, True
        if deflated and lo < cand <= hi:
            roots.append(float(cand))
    try:
        roots += uv.real_roots(g, lo, hi)
    except ArithmeticError as exc:  # pragma: no cover - exact arithmetic should not fail
        raise RootFindingError(str(exc)) from exc
    return PunctureSet(tuple(sorted(set(roots))))


# -- complex model ---------------------------------------------------------------

def _near(w, target) -> bool:
    return abs(complex(w) - complex(target)) <= PUNCTURE_HARD


def h_complex(u, v, lam, b):
    """``(b / (v (lam v + 1)), u, (v - u^2 + 1) / lam, lam)``.

    Works for Python complex numbers and, exactly, for Fraction or
    GaussianRational inputs.
    """
    if lam == 0:
        raise ValueError("lam must be nonzero (use case1_fiber_param for lam = 0)")
    if b == 0:
        raise ValueError("b must be nonzero")
    if _near(v, 0) or _near(lam * v + 1, 0):
        raise PunctureError("v is at a puncture {0, -1/lam}")
    return (b / (v * (lam * v + 1)), u, (v - u * u + 1) / lam, lam)


def h_complex_array(u, v, lam, b) -> np.ndarray:
    u, v = np.asarray(u, dtype=complex), np.asarray(v, dtype=complex)
    lam = np.asarray(lam, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if np.any(lam == 0) or np.any(b == 0):
        raise ValueError("lam and b must be nonzero")
    if np.any(np.abs(v) <= PUNCTURE_HARD) or np.any(np.abs(lam * v + 1) <= PUNCTURE_HARD):
        raise PunctureError("v is at a puncture {0, -1/lam}")
    shape = np.broadcast(u, v, lam, b).shape
    return np.stack([np.broadcast_to(b / (v * (lam * v + 1)), shape), np.broadcast_to(u, shape),
                     np.broadcast_to((v - u * u + 1) / lam, shape), np.broadcast_to(lam, shape)], axis=-1)


def g_complex(x, y, z, lam):
    return (y, y * y + lam * z - 1)


def case1_fiber_param(y, z, b):
    if _near(y, 1) or _near(y, -1):
        raise PunctureError("y is at a puncture {-1, 1}")
    if b == 0:
        raise ValueError("b must be nonzero")
    return (b / (y * y - 1), y, z, 0)


def complex_fiber_residual(points: np.ndarray, b) -> np.ndarray:
    pts = np.atleast_2d(np.asarray(points, dtype=complex))
    fn = complex_f().to_numpy()
    return np.abs(fn(pts[:, 0], pts[:, 1], pts[:, 2], pts[:, 3]) - b)


# -- the C ⊔ C example ---------------------------------------------------------------

@dataclass(frozen=True)
class GurjarSheets:
    x0: complex
    t: complex
    roots: tuple = ()
    discriminant: complex = 0j
    degenerate: str | None = None

    def sheet_points(self, i: int, ys) -> np.ndarray:
        if self.degenerate:
            raise ValueError(f"degenerate fiber: {self.degenerate}")
        ys = np.asarray(ys, dtype=complex)
        w = self.roots[i]
        return np.stack([np.full_like(ys, self.x0), ys, (w - ys * ys) / self.x0], axis=-1)

    def residual(self, ys) -> float:
        F = gurjar_map().to_numpy()
        worst = 0.0
        for i in range(len(self.roots)):
            pts = self.sheet_points(i, ys)
            vals = F(pts[:, 0], pts[:, 1], pts[:, 2])
            worst = max(worst, float(np.max(np.abs(vals - np.array([self.x0, self.t])))))
        return worst


def gurjar_fiber_sheets(x0: complex, t: complex) -> GurjarSheets:
    """Solve ``[(x0 - 1) w + 1][x0 w - 1] = t`` for ``w = x z + y^2``.

    Expanded: ``x0 (x0 - 1) w^2 + w - (1 + t) = 0``.  Each root gives one
    sheet ``y -> (x0, y, (w - y^2) / x0)``, a copy of C.
    """
    x0, t = complex(x0), complex(t)
    if x0 == 0:
        return GurjarSheets(x0, t, degenerate="x0 = 0: the sheet map divides by x0")
    A, B, C = x0 * (x0 - 1), 1 + 0j, -(1 + t)
    if A == 0:
        return GurjarSheets(x0, t, roots=(-C / B,), degenerate="x0 = 1: the w-equation is linear")
    disc = B * B - 4 * A * C
    if abs(disc) <= PUNCTURE_HARD * max(1.0, abs(B) ** 2, abs(4 * A * C)):
        raise ValueError("the w-quadratic has a double root")
    s = cmath.sqrt(disc)
    if (B.conjugate() * s).real < 0:
        s = -s
    q = -(B + s) / 2
    return GurjarSheets(x0, t, roots=(q / A, C / q), discriminant=disc)


# -- submersion sampling ---------------------------------------------------------------

@dataclass(frozen=True)
class SubmersionReport:
    min_singular_value: float
    argmin_index: int
    argmin_point: tuple
    threshold: float
    n_points: int

    @property
    def full_rank(self) -> bool:
        return self.min_singular_value > self.threshold


def submersion_sample_report(F: PolyMap, points, field: str = "real",
                             targets=None, threshold: float = RANK_THRESHOLD) -> SubmersionReport:
    """Smallest Jacobian singular value of ``F`` over ``points``.

    The Jacobian is formed from exact partial derivatives and evaluated in
    floating point.  When ``targets`` is given, each point must lie on the
    fiber over its target within 1e-6.  Ties in the minimum resolve to the
    lowest point index.
    """
    pts = np.asarray(points, dtype=complex if field == "complex" else float)
    if pts.ndim != 2 or len(pts) == 0:
        raise ValueError("need a non-empty (n, dim) array of points")
    cols = [pts[:, i] for i in range(pts.shape[1])]
    if targets is not None:
        vals = F.to_numpy()(*cols)
        res = np.max(np.abs(vals - np.asarray(targets)), axis=-1)
        if np.any(res > 1e-6):
            raise ValueError(f"point {int(np.argmax(res))} is off its fiber (residual {res.max():.3g})")
    J = F.jacobian_numpy()(*cols)
    smin = np.linalg.svd(J, compute_uv=False).min(axis=-1)
    idx = int(np.argmin(smin))
    return SubmersionReport(float(smin[idx]), idx, tuple(pts[idx].tolist()), threshold, len(pts))


# -- deterministic point clouds --------------------------------------------------------

def kronecker_lattice(n: int, dim: int) -> np.ndarray:
    """Additive-recurrence low-discrepancy lattice in ``[0, 1)^dim``.

    Point ``k`` is ``frac(1/2 + k * g^-j)``, ``j = 1..dim``, where ``g`` is
    the real root of ``x^(dim+1) = x + 1``.
    """
    g = 2.0
    for _ in range(60):
        g = (1.0 + g) ** (1.0 / (dim + 1))
    alphas = np.array([g ** -(j + 1) for j in range(dim)])
    k = np.arange(n, dtype=float)[:, None]
    return np.mod(0.5 + k * alphas, 1.0)


def real_model_cloud(n: int = 10_000, b_range=(0.5, 2.0), lam_range=(-0.5, 0.5),
                     a_range=(-1.5, 1.5)):
    """Lattice of ``(u, v, a, b, lam)`` rows with ``(u, v)`` on the unit circle."""
    L = kronecker_lattice(n, 4)
    theta = 2 * np.pi * L[:, 0]
    a = a_range[0] + (a_range[1] - a_range[0]) * L[:, 1]
    b = b_range[0] + (b_range[1] - b_range[0]) * L[:, 2]
    lam = lam_range[0] + (lam_range[1] - lam_range[0]) * L[:, 3]
    return np.column_stack([np.cos(theta), np.sin(theta), a, b, lam])


def real_cloud_to_fibers(cloud: np.ndarray, f: ExactPoly | None = None) -> np.ndarray:
    """Apply the model-to-fiber map row by row (each row carries its own b, lam)."""
    f = particular_f() if f is None else f
    fn = f.to_numpy()
    u, v, a, b, lam = cloud.T
    lead = u * u + v * v * fn(a, lam)
    if np.any((v > 0) & (np.abs(lead) <= PUNCTURE_HARD)):
        raise PunctureError("cloud contains a puncture")
    root = np.sqrt(v * v + 4.0 * b * lead)
    with np.errstate(divide="ignore", invalid="ignore"):
        al = np.where(v > 0, (v + root) / (2.0 * np.where(lead == 0, 1.0, lead)), 2.0 * b / (root - v))
    return np.column_stack([u * al, v * al, a, lam])


def complex_model_cloud(n: int = 10_000, lam_abs=(0.05, 0.3), b_disk=0.5):
    """Lattice of ``(u, v, lam, b)`` with ``v`` in an annulus clear of ``{0, -1/lam}``."""
    L = kronecker_lattice(n, 7)
    u = (3 * L[:, 0] - 1.5) + 1j * (3 * L[:, 1] - 1.5)
    v = (0.2 + 1.8 * L[:, 2]) * np.exp(2j * np.pi * L[:, 3])
    lam = (lam_abs[0] + (lam_abs[1] - lam_abs[0]) * L[:, 4]) * np.exp(2j * np.pi * L[:, 5])
    b = 1 + b_disk * np.sqrt(L[:, 6]) * np.exp(2j * np.pi * L[:, 0] * 7.0)
    return u, v, lam, b
