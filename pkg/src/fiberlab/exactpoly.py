"""Exact multivariate polynomials over Q and Q(i).

Coefficients are :class:`fractions.Fraction` for rational values and
:class:`GaussianRational` when the imaginary part is nonzero.  Every
operation returns a fully normalized polynomial, so ``==`` is structural.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational as _RationalABC
from typing import Iterable, Mapping, Sequence, Union

import numpy as np

__all__ = [
    "GaussianRational",
    "ExactPoly",
    "RatFunc",
    "PolyMap",
    "ContextMismatch",
    "SquareOf",
    "EvenPowersNonnegCoeffs",
    "SumOf",
    "ProductOf",
    "CertificateResult",
    "poly_arith",
    "partial_derivative",
    "evaluate",
    "evaluate_float",
    "substitute",
    "identity_witness_check",
    "verify_nonneg_certificate",
]


class ContextMismatch(ValueError):
    """Two polynomials were combined over different variable lists."""


@dataclass(frozen=True)
class GaussianRational:
    """A complex number with rational real and imaginary parts."""

    re: Fraction
    im: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "re", Fraction(self.re))
        object.__setattr__(self, "im", Fraction(self.im))

    @classmethod
    def coerce(cls, value) -> "GaussianRational":
        if isinstance(value, GaussianRational):
            return value
        if isinstance(value, (int, Fraction, _RationalABC)):
            return cls(Fraction(value), Fraction(0))
        raise TypeError(f"cannot treat {value!r} as an exact complex number")

    def conjugate(self) -> "GaussianRational":
        return GaussianRational(self.re, -self.im)

    def norm(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    def __add__(self, other):
        try:
            o = GaussianRational.coerce(other)
        except TypeError:
            return NotImplemented
        return GaussianRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __sub__(self, other):
        try:
            o = GaussianRational.coerce(other)
        except TypeError:
            return NotImplemented
        return GaussianRational(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        try:
            o = GaussianRational.coerce(other)
        except TypeError:
            return NotImplemented
        return GaussianRational(self.re * o.re - self.im * o.im,
                                self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        try:
            o = GaussianRational.coerce(other)
        except TypeError:
            return NotImplemented
        n = o.norm()
        if n == 0:
            raise ZeroDivisionError("division by exact zero")
        q = self * o.conjugate()
        return GaussianRational(q.re / n, q.im / n)

    def __rtruediv__(self, other):
        return GaussianRational.coerce(other) / self

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return GaussianRational(1) / (self ** (-k))
        out = GaussianRational(1)
        base = self
        while k:
            if k & 1:
                out = out * base
            k >>= 1
            if k:
                base = base * base
        return out

    def __eq__(self, other):
        if isinstance(other, GaussianRational):
            return self.re == other.re and self.im == other.im
        if isinstance(other, (int, Fraction)):
            return self.im == 0 and self.re == other
        if isinstance(other, complex):
            return complex(self) == other
        return NotImplemented

    def __hash__(self):
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        return f"GaussianRational({self.re!s}, {self.im!s})"

    def __str__(self):
        if self.im == 0:
            return str(self.re)
        if self.re == 0:
            return f"{self.im}*i"
        sign = "+" if self.im > 0 else "-"
        return f"({self.re}{sign}{abs(self.im)}*i)"


Coefficient = Union[Fraction, GaussianRational]
Exponents = tuple


def _coef(value) -> Coefficient:
    """Normalize a coefficient: Fraction when real, GaussianRational otherwise."""
    if isinstance(value, GaussianRational):
        return value.re if value.im == 0 else value
    if isinstance(value, bool):
        return Fraction(int(value))
    if isinstance(value, (int, Fraction, _RationalABC)):
        return Fraction(value)
    if isinstance(value, float):
        raise TypeError("floating coefficients are not allowed in exact polynomials; "
                        "convert with Fraction(str(x)) first")
    if isinstance(value, complex):
        raise TypeError("complex float coefficients are not allowed; use GaussianRational")
    raise TypeError(f"unsupported coefficient {value!r}")


def _grlex_key(exps: Exponents):
    return (sum(exps), exps)


class ExactPoly:
    """Polynomial with exact coefficients over an ordered variable list.

    ``terms`` is the canonical tuple of ``(coefficient, exponents)`` pairs
    in decreasing graded lexicographic order.
    """

    __slots__ = ("variables", "_terms", "_sorted")

    def __init__(self, variables: Sequence[str], terms: Mapping[Exponents, object] | Iterable = ()):
        variables = tuple(variables)
        if len(set(variables)) != len(variables):
            raise ValueError(f"duplicate variable names in {variables}")
        self.variables = variables
        n = len(variables)
        acc: dict = {}
        items = terms.items() if isinstance(terms, Mapping) else ((e, c) for c, e in terms)
        for exps, c in items:
            exps = tuple(int(e) for e in exps)
            if len(exps) != n:
                raise ValueError(f"exponent vector {exps} does not match {n} variables")
            if any(e < 0 for e in exps):
                raise ValueError(f"negative exponent in {exps}")
            c = _coef(c)
            acc[exps] = acc.get(exps, 0) + c
        self._terms = {e: _coef(c) for e, c in acc.items() if c != 0}
        self._sorted = None

    # -- constructors -------------------------------------------------------
    @classmethod
    def constant(cls, variables: Sequence[str], value) -> "ExactPoly":
        return cls(variables, {(0,) * len(tuple(variables)): value})

    @classmethod
    def zero(cls, variables: Sequence[str]) -> "ExactPoly":
        return cls(variables, {})

    @classmethod
    def var(cls, variables: Sequence[str], name: str) -> "ExactPoly":
        variables = tuple(variables)
        if name not in variables:
            raise KeyError(f"unknown variable {name!r}")
        exps = tuple(1 if v == name else 0 for v in variables)
        return cls(variables, {exps: 1})

    @classmethod
    def gens(cls, variables: Sequence[str]) -> tuple["ExactPoly", ...]:
        return tuple(cls.var(variables, v) for v in variables)

    # -- structure -----------------------------------------------------------
    @property
    def terms(self) -> tuple:
        if self._sorted is None:
            self._sorted = tuple((self._terms[e], e)
                                 for e in sorted(self._terms, key=_grlex_key, reverse=True))
        return self._sorted

    def term_dict(self) -> dict:
        return dict(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return all(sum(e) == 0 for e in self._terms)

    def constant_value(self) -> Coefficient:
        if not self.is_constant():
            raise ValueError("polynomial is not constant")
        return self._terms.get((0,) * len(self.variables), Fraction(0))

    @property
    def degree(self) -> int:
        return max((sum(e) for e in self._terms), default=-1)

    def degree_in(self, name: str) -> int:
        i = self.variables.index(name)
        return max((e[i] for e in self._terms), default=-1)

    @property
    def field(self) -> str:
        return "complex" if any(isinstance(c, GaussianRational) for c in self._terms.values()) else "real"

    def leading_term(self):
        return self.terms[0] if self._terms else None

    def __len__(self):
        return len(self._terms)

    def __eq__(self, other):
        if isinstance(other, ExactPoly):
            return self.variables == other.variables and self._terms == other._terms
        if isinstance(other, (int, Fraction, GaussianRational)):
            return self.is_constant() and self.constant_value() == other
        return NotImplemented

    def __hash__(self):
        return hash((self.variables, frozenset(self._terms.items())))

    def with_variables(self, variables: Sequence[str]) -> "ExactPoly":
        """Re-express over a variable list that contains every used variable."""
        variables = tuple(variables)
        index = {v: i for i, v in enumerate(variables)}
        out = {}
        for e, c in self._terms.items():
            new = [0] * len(variables)
            for name, k in zip(self.variables, e):
                if k:
                    if name not in index:
                        raise ContextMismatch(f"variable {name!r} missing from {variables}")
                    new[index[name]] = k
            out[tuple(new)] = c
        return ExactPoly(variables, out)

    # -- arithmetic ---------------------------------------------------------
    def _lift(self, other) -> "ExactPoly":
        if isinstance(other, ExactPoly):
            if other.variables != self.variables:
                raise ContextMismatch(f"variable contexts differ: {self.variables} vs {other.variables}")
            return other
        return ExactPoly.constant(self.variables, other)

    def __add__(self, other):
        if isinstance(other, RatFunc):
            return NotImplemented
        o = self._lift(other)
        acc = dict(self._terms)
        for e, c in o._terms.items():
            acc[e] = acc.get(e, 0) + c
        return ExactPoly(self.variables, acc)

    __radd__ = __add__

    def __neg__(self):
        return ExactPoly(self.variables, {e: -c for e, c in self._terms.items()})

    def __sub__(self, other):
        if isinstance(other, RatFunc):
            return NotImplemented
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        if isinstance(other, RatFunc):
            return NotImplemented
        o = self._lift(other)
        acc: dict = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in o._terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                acc[e] = acc.get(e, 0) + c1 * c2
        return ExactPoly(self.variables, acc)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction, GaussianRational)):
            if other == 0:
                raise ZeroDivisionError("division by zero")
            inv = Fraction(1) / other if not isinstance(other, GaussianRational) else GaussianRational(1) / other
            return self * inv
        if isinstance(other, ExactPoly):
            return RatFunc(self, self._lift(other))
        if isinstance(other, RatFunc):
            return RatFunc(self) / other
        return NotImplemented

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError("exponent must be a nonnegative integer")
        out = ExactPoly.constant(self.variables, 1)
        base = self
        while k:
            if k & 1:
                out = out * base
            k >>= 1
            if k:
                base = base * base
        return out

    def diff(self, name: str) -> "ExactPoly":
        return partial_derivative(self, name)

    def evaluate(self, point, field: str = "real"):
        return evaluate(self, point, field)

    def evaluate_float(self, point, field: str = "real"):
        return evaluate_float(self, point, field)

    def divide_exact(self, divisor: "ExactPoly") -> "ExactPoly | None":
        """Quotient if ``divisor`` divides ``self`` exactly, else ``None``.

        Single-divisor multivariate division in grlex order; with one
        divisor a zero remainder is equivalent to divisibility.
        """
        divisor = self._lift(divisor)
        if divisor.is_zero():
            raise ZeroDivisionError("division by the zero polynomial")
        lc, le = divisor.terms[0]
        rem = self
        quot: dict = {}
        while not rem.is_zero():
            c, e = rem.terms[0]
            if any(a < b for a, b in zip(e, le)):
                return None
            qe = tuple(a - b for a, b in zip(e, le))
            qc = c / lc
            quot[qe] = qc
            rem = rem - ExactPoly(self.variables, {qe: qc}) * divisor
        return ExactPoly(self.variables, quot)

    # -- numeric ------------------------------------------------------------
    def to_numpy(self):
        """Vectorized float evaluator ``fn(*arrays)`` in variable order."""
        terms = [(complex(c) if isinstance(c, GaussianRational) else float(c), e)
                 for c, e in self.terms]
        is_complex = self.field == "complex"

        def fn(*args):
            if len(args) != len(self.variables):
                raise ValueError(f"expected {len(self.variables)} arguments, got {len(args)}")
            arrs = [np.asarray(a) for a in args]
            shape = np.broadcast(*arrs).shape if arrs else ()
            cache: dict = {}

            def pw(i, k):
                key = (i, k)
                if key not in cache:
                    cache[key] = arrs[i] ** k
                return cache[key]

            dtype = complex if is_complex or any(np.iscomplexobj(a) for a in arrs) else float
            out = np.zeros(shape, dtype=dtype)
            # accumulate lowest-degree terms first; they are usually smallest
            for c, e in reversed(terms):
                term = np.full(shape, c, dtype=dtype)
                for i, k in enumerate(e):
                    if k:
                        term = term * pw(i, k)
                out = out + term
            return out

        return fn

    # -- printing -----------------------------------------------------------
    def __str__(self):
        if not self._terms:
            return "0"
        parts = []
        for c, e in self.terms:
            mono = "*".join(v if k == 1 else f"{v}^{k}" for v, k in zip(self.variables, e) if k)
            if isinstance(c, GaussianRational):
                body = f"{c}*{mono}" if mono else str(c)
                parts.append(("+", body))
                continue
            sign = "-" if c < 0 else "+"
            a = abs(c)
            if mono:
                body = mono if a == 1 else f"{a}*{mono}"
            else:
                body = str(a)
            parts.append((sign, body))
        first_sign, first = parts[0]
        out = ("-" if first_sign == "-" else "") + first
        for sign, body in parts[1:]:
            out += f" {sign} {body}"
        return out

    def __repr__(self):
        return f"ExactPoly({self.variables!r}, {str(self)!r})"


class RatFunc:
    """Quotient of two exact polynomials over the same variables.

    Reduction only cancels what trial division detects: a denominator
    dividing the numerator exactly, a common monomial factor and the
    scalar content.  No multivariate gcd is attempted.
    """

    __slots__ = ("numerator", "denominator")

    def __init__(self, numerator: ExactPoly, denominator: ExactPoly | None = None):
        if denominator is None:
            denominator = ExactPoly.constant(numerator.variables, 1)
        if numerator.variables != denominator.variables:
            raise ContextMismatch("numerator and denominator contexts differ")
        if denominator.is_zero():
            raise ZeroDivisionError("identically zero denominator")
        num, den = _reduce(numerator, denominator)
        self.numerator = num
        self.denominator = den

    @property
    def variables(self):
        return self.numerator.variables

    def is_polynomial(self) -> bool:
        return self.denominator == 1

    def as_poly(self) -> ExactPoly:
        if not self.is_polynomial():
            raise ValueError(f"{self} is not a polynomial")
        return self.numerator

    def _lift(self, other) -> "RatFunc":
        if isinstance(other, RatFunc):
            if other.variables != self.variables:
                raise ContextMismatch("variable contexts differ")
            return other
        if isinstance(other, ExactPoly):
            return RatFunc(self.numerator._lift(other))
        return RatFunc(ExactPoly.constant(self.variables, other))

    def __add__(self, other):
        o = self._lift(other)
        if self.denominator == o.denominator:
            return RatFunc(self.numerator + o.numerator, self.denominator)
        return RatFunc(self.numerator * o.denominator + o.numerator * self.denominator,
                       self.denominator * o.denominator)

    __radd__ = __add__

    def __neg__(self):
        return RatFunc(-self.numerator, self.denominator)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        o = self._lift(other)
        return RatFunc(self.numerator * o.numerator, self.denominator * o.denominator)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._lift(other)
        if o.numerator.is_zero():
            raise ZeroDivisionError("division by zero rational function")
        return RatFunc(self.numerator * o.denominator, self.denominator * o.numerator)

    def __rtruediv__(self, other):
        return self._lift(other) / self

    def __pow__(self, k: int):
        return RatFunc(self.numerator ** k, self.denominator ** k)

    def __eq__(self, other):
        if isinstance(other, (RatFunc, ExactPoly, int, Fraction, GaussianRational)):
            o = self._lift(other)
            return (self.numerator * o.denominator - o.numerator * self.denominator).is_zero()
        return NotImplemented

    def __hash__(self):
        return hash((self.numerator, self.denominator))

    def evaluate(self, point, field: str = "real"):
        return evaluate(self.numerator, point, field) / evaluate(self.denominator, point, field)

    def __str__(self):
        if self.is_polynomial():
            return str(self.numerator)
        return f"({self.numerator})/({self.denominator})"

    def __repr__(self):
        return f"RatFunc({str(self)!r})"


def _monomial_gcd(p: ExactPoly) -> tuple:
    exps = list(p.term_dict())
    return tuple(min(col) for col in zip(*exps)) if exps else (0,) * len(p.variables)


def _reduce(num: ExactPoly, den: ExactPoly):
    if num.is_zero():
        return num, ExactPoly.constant(num.variables, 1)
    q = num.divide_exact(den)
    if q is not None:
        return q, ExactPoly.constant(num.variables, 1)
    g = tuple(min(a, b) for a, b in zip(_monomial_gcd(num), _monomial_gcd(den)))
    if any(g):
        shift = lambda p: ExactPoly(p.variables, {tuple(a - b for a, b in zip(e, g)): c
                                                  for e, c in p.term_dict().items()})
        num, den = shift(num), shift(den)
    # normalize the denominator's leading coefficient to 1
    lc = den.terms[0][0]
    if lc != 1:
        num, den = num / lc, den / lc
    return num, den


class PolyMap:
    """Ordered tuple of polynomials over one shared variable list."""

    def __init__(self, components: Sequence[ExactPoly]):
        components = tuple(components)
        if not components:
            raise ValueError("a polynomial map needs at least one component")
        ctx = components[0].variables
        for c in components:
            if c.variables != ctx:
                raise ContextMismatch("map components must share one variable context")
        self.components = components
        self.variables = ctx

    def __len__(self):
        return len(self.components)

    def __getitem__(self, i):
        return self.components[i]

    def jacobian(self) -> list[list[ExactPoly]]:
        return [[partial_derivative(c, v) for v in self.variables] for c in self.components]

    def to_numpy(self):
        fns = [c.to_numpy() for c in self.components]

        def fn(*args):
            return np.stack([np.broadcast_to(f(*args), np.broadcast(*map(np.asarray, args)).shape)
                             for f in fns], axis=-1)

        return fn

    def jacobian_numpy(self):
        """Vectorized Jacobian: returns an array of shape (..., m, n)."""
        rows = [[d.to_numpy() for d in row] for row in self.jacobian()]

        def fn(*args):
            shape = np.broadcast(*map(np.asarray, args)).shape
            return np.stack([np.stack([np.broadcast_to(d(*args), shape) for d in row], axis=-1)
                             for row in rows], axis=-2)

        return fn

    def __str__(self):
        return "(" + ", ".join(str(c) for c in self.components) + ")"


# -- module-level operations ----------------------------------------------

def poly_arith(a: ExactPoly, b: ExactPoly, op: str) -> ExactPoly:
    if a.variables != b.variables:
        raise ContextMismatch(f"variable contexts differ: {a.variables} vs {b.variables}")
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise ValueError(f"unknown operation {op!r}")


def partial_derivative(p: ExactPoly, var: str) -> ExactPoly:
    if var not in p.variables:
        raise KeyError(f"unknown variable {var!r}")
    i = p.variables.index(var)
    out = {}
    for e, c in p.term_dict().items():
        k = e[i]
        if k:
            out[e[:i] + (k - 1,) + e[i + 1:]] = c * k
    return ExactPoly(p.variables, out)


def _is_exact(x) -> bool:
    return isinstance(x, (int, Fraction, GaussianRational)) and not isinstance(x, bool)


def _point_values(p: ExactPoly, point) -> list:
    if isinstance(point, Mapping):
        missing = [v for v in p.variables if v not in point]
        if missing:
            raise ValueError(f"no value for variables {missing}")
        return [point[v] for v in p.variables]
    vals = list(point)
    if len(vals) != len(p.variables):
        raise ValueError(f"expected {len(p.variables)} values, got {len(vals)}")
    return vals


def evaluate(p: ExactPoly, point, field: str = "real"):
    """Evaluate at a point given as a sequence or a name -> value mapping.

    Exact inputs give an exact result.  If any input is a float, the
    floating path of :func:`evaluate_float` is used and only the value
    is returned.
    """
    vals = _point_values(p, point)
    if field not in ("real", "complex"):
        raise ValueError(f"unknown field {field!r}")
    if field == "real" and (p.field == "complex" or any(_has_imag(v) for v in vals)):
        raise ValueError("complex data in real-field evaluation")
    if all(_is_exact(v) for v in vals):
        total = Fraction(0)
        for e, c in p.term_dict().items():
            t = c
            for v, k in zip(vals, e):
                if k:
                    t = t * (v if isinstance(v, GaussianRational) else Fraction(v)) ** k
            total = total + t
        return _coef(total)
    return evaluate_float(p, vals, field)[0]


def _has_imag(v) -> bool:
    if isinstance(v, GaussianRational):
        return v.im != 0
    if isinstance(v, complex):
        return v.imag != 0
    return False


def evaluate_float(p: ExactPoly, point, field: str = "real"):
    """Floating evaluation returning ``(value, error_bound)``.

    Each term is a power product; terms are summed with ``math.fsum``
    (per component for complex values).  The bound is a standard a-priori
    estimate: ``(deg + 2) * eps * sum |term|`` plus the rounding of the
    coefficients themselves.
    """
    vals = _point_values(p, point)
    if field not in ("real", "complex"):
        raise ValueError(f"unknown field {field!r}")
    if field == "real" and (p.field == "complex" or any(_has_imag(v) for v in vals)):
        raise ValueError("complex data in real-field evaluation")
    cplx = field == "complex"
    fvals = [complex(v) if cplx else float(v.real if isinstance(v, complex) else v) for v in vals]
    re_parts, im_parts = [], []
    abs_sum = 0.0
    for c, e in p.terms:
        t = complex(c) if cplx else float(c)
        for v, k in zip(fvals, e):
            if k:
                t = t * v ** k
        abs_sum += abs(t)
        if cplx:
            re_parts.append(t.real)
            im_parts.append(t.imag)
        else:
            re_parts.append(t)
    eps = np.finfo(float).eps
    bound = (max(p.degree, 0) + 2) * eps * abs_sum
    if cplx:
        return complex(math.fsum(re_parts), math.fsum(im_parts)), bound * math.sqrt(2)
    return math.fsum(re_parts), bound


def _as_ratfunc(value, variables) -> RatFunc:
    if isinstance(value, RatFunc):
        return value
    if isinstance(value, ExactPoly):
        return RatFunc(value)
    return RatFunc(ExactPoly.constant(variables, value))


def substitute(p: ExactPoly, bindings: Mapping[str, object], variables: Sequence[str] | None = None) -> RatFunc:
    """Substitute polynomials, rational functions or constants for variables.

    The target variable list is taken from the bound expressions (they
    must agree) or from ``variables``; unbound variables of ``p`` are kept
    and must exist in the target list.
    """
    for name in bindings:
        if name not in p.variables:
            raise KeyError(f"unknown variable {name!r}")
    ctxs = {b.variables for b in bindings.values() if isinstance(b, (ExactPoly, RatFunc))}
    if variables is not None:
        target = tuple(variables)
    elif len(ctxs) > 1:
        raise ContextMismatch(f"bindings use different variable contexts: {sorted(ctxs)}")
    elif ctxs:
        target = ctxs.pop()
    else:
        target = p.variables
    used = {v for e in p.term_dict() for v, k in zip(p.variables, e) if k}
    images = []
    for v in p.variables:
        if v not in used:
            images.append(None)
            continue
        if v in bindings:
            img = _as_ratfunc(bindings[v], target)
            if img.variables != target:
                raise ContextMismatch(f"binding for {v!r} is not over {target}")
        else:
            if v not in target:
                raise ContextMismatch(f"unbound variable {v!r} missing from target {target}")
            img = RatFunc(ExactPoly.var(target, v))
        images.append(img)
    powers: dict = {}

    def pw(i, k):
        if (i, k) not in powers:
            powers[(i, k)] = images[i] ** k
        return powers[(i, k)]

    total = RatFunc(ExactPoly.zero(target))
    for c, e in p.terms:
        term = RatFunc(ExactPoly.constant(target, c))
        for i, k in enumerate(e):
            if k:
                term = term * pw(i, k)
        total = total + term
    return total


def identity_witness_check(target: ExactPoly, generators: Sequence[ExactPoly],
                           cofactors: Sequence[ExactPoly]) -> bool:
    """True iff ``target == sum(cofactor_i * generator_i)`` exactly."""
    if len(generators) != len(cofactors):
        raise ValueError("generators and cofactors must have equal length")
    acc = target
    for g, c in zip(generators, cofactors):
        if g.variables != target.variables or c.variables != target.variables:
            raise ContextMismatch("witness polynomials must share the target's context")
        acc = acc - c * g
    return acc.is_zero()


# -- nonnegativity certificates ---------------------------------------------

@dataclass(frozen=True)
class SquareOf:
    poly: ExactPoly


@dataclass(frozen=True)
class EvenPowersNonnegCoeffs:
    poly: ExactPoly


@dataclass(frozen=True)
class SumOf:
    children: tuple


@dataclass(frozen=True)
class ProductOf:
    children: tuple


@dataclass(frozen=True)
class CertificateResult:
    ok: bool
    reason: str  # "ok" | "structural" | "expansion"
    detail: str = ""

    def __bool__(self):
        return self.ok


def _cert_expand(cert, variables) -> ExactPoly:
    """Expand a certificate tree; raises ValueError on structural defects."""
    if isinstance(cert, SquareOf):
        q = cert.poly
        if q.variables != variables:
            raise ContextMismatch("certificate leaf uses a different context")
        if q.field != "real":
            raise ValueError("SquareOf leaf has complex coefficients")
        return q * q
    if isinstance(cert, EvenPowersNonnegCoeffs):
        q = cert.poly
        if q.variables != variables:
            raise ContextMismatch("certificate leaf uses a different context")
        for c, e in q.terms:
            if isinstance(c, GaussianRational) or c < 0:
                raise ValueError(f"coefficient {c} is not a nonnegative rational")
            if any(k % 2 for k in e):
                raise ValueError(f"monomial exponent {e} is not all-even")
        return q
    if isinstance(cert, (SumOf, ProductOf)):
        if not cert.children:
            raise ValueError("empty certificate node")
        parts = [_cert_expand(ch, variables) for ch in cert.children]
        out = parts[0]
        for q in parts[1:]:
            out = out + q if isinstance(cert, SumOf) else out * q
        return out
    raise ValueError(f"unknown certificate node {type(cert).__name__}")


def verify_nonneg_certificate(p: ExactPoly, cert) -> CertificateResult:
    if p.field != "real":
        raise ValueError("nonnegativity certificates need real coefficients")
    try:
        expanded = _cert_expand(cert, p.variables)
    except ContextMismatch as exc:
        return CertificateResult(False, "structural", str(exc))
    except ValueError as exc:
        return CertificateResult(False, "structural", str(exc))
    if expanded != p:
        return CertificateResult(False, "expansion", f"certificate expands to {expanded}")
    return CertificateResult(True, "ok")
