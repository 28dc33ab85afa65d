"""Exact univariate polynomial helpers over Q.

Polynomials are lists of :class:`Fraction` coefficients, lowest degree
first, with no trailing zeros (the zero polynomial is ``[]``).  Used for
discriminants and certified real-root isolation by Sturm sequences.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Sequence

UPoly = list


def trim(p: Sequence) -> UPoly:
    p = [Fraction(c) for c in p]
    while p and p[-1] == 0:
        p.pop()
    return p


def deg(p: UPoly) -> int:
    return len(p) - 1


def add(a: UPoly, b: UPoly) -> UPoly:
    n = max(len(a), len(b))
    return trim([(a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n)])


def sub(a: UPoly, b: UPoly) -> UPoly:
    return add(a, [-c for c in b])


def mul(a: UPoly, b: UPoly) -> UPoly:
    if not a or not b:
        return []
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return trim(out)


def scale(a: UPoly, c) -> UPoly:
    return trim([c * x for x in a])


def divmod_(a: UPoly, b: UPoly) -> tuple[UPoly, UPoly]:
    if not b:
        raise ZeroDivisionError("division by zero polynomial")
    a = list(a)
    q = [Fraction(0)] * max(len(a) - len(b) + 1, 0)
    lb = b[-1]
    while len(a) >= len(b) and a:
        k = len(a) - len(b)
        c = a[-1] / lb
        q[k] = c
        for i, y in enumerate(b):
            a[i + k] -= c * y
        a = trim(a)
    return trim(q), a


def exact_div(a: UPoly, b: UPoly) -> UPoly:
    q, r = divmod_(a, b)
    if r:
        raise ArithmeticError("inexact polynomial division")
    return q


def monic(p: UPoly) -> UPoly:
    return [c / p[-1] for c in p] if p else []


def gcd(a: UPoly, b: UPoly) -> UPoly:
    a, b = trim(a), trim(b)
    while b:
        a, b = b, divmod_(a, b)[1]
    return monic(a)


def deriv(p: UPoly) -> UPoly:
    return trim([i * c for i, c in enumerate(p)][1:])


def squarefree(p: UPoly) -> UPoly:
    p = trim(p)
    if deg(p) < 1:
        return p
    return monic(exact_div(p, gcd(p, deriv(p))))


def evaluate(p: UPoly, x):
    acc = Fraction(0) if isinstance(x, (int, Fraction)) else 0.0
    for c in reversed(p):
        acc = acc * x + c
    return acc


def evaluate_float(p: UPoly, x: float) -> float:
    acc = 0.0
    for c in reversed(p):
        acc = acc * x + float(c)
    return acc


def sturm_sequence(p: UPoly) -> list[UPoly]:
    seq = [trim(p), deriv(p)]
    while seq[-1]:
        r = divmod_(seq[-2], seq[-1])[1]
        if not r:
            break
        seq.append([-c for c in r])
    return seq


def _sign(x) -> int:
    return (x > 0) - (x < 0)


def _variations(seq: list[UPoly], x: Fraction) -> int:
    signs = [s for s in (_sign(evaluate(q, x)) for q in seq) if s]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def count_roots(seq: list[UPoly], a: Fraction, b: Fraction) -> int:
    """Distinct real roots in the half-open interval (a, b]."""
    return _variations(seq, a) - _variations(seq, b)


def cauchy_bound(p: UPoly) -> Fraction:
    lead = abs(p[-1])
    return 1 + max((abs(c) / lead for c in p[:-1]), default=Fraction(0))


def isolate_real_roots(p: UPoly, lo, hi) -> list[tuple[Fraction, Fraction]]:
    """Disjoint intervals ``(a, b]`` each holding exactly one root of ``p``."""
    p = squarefree(p)
    if deg(p) < 1:
        return []
    lo, hi = Fraction(lo), Fraction(hi)
    seq = sturm_sequence(p)
    out = []
    stack = [(lo, hi, count_roots(seq, lo, hi))]
    while stack:
        a, b, n = stack.pop()
        if n == 0:
            continue
        if n == 1:
            out.append((a, b))
            continue
        m = (a + b) / 2
        stack.append((m, b, count_roots(seq, m, b)))
        stack.append((a, m, count_roots(seq, a, m)))
    out.sort()
    return out


def refine_root(p: UPoly, a: Fraction, b: Fraction, rel_tol: float = 2.0 ** -60) -> Fraction:
    """Bisect an isolating interval ``(a, b]`` of a squarefree ``p`` on exact signs."""
    fb = _sign(evaluate(p, b))
    if fb == 0:
        return b
    tol = Fraction(rel_tol) * max(1, abs(a), abs(b))
    while b - a > tol:
        m = (a + b) / 2
        # round the midpoint to a short dyadic to keep denominators small
        m = Fraction(round(m * 2 ** 60), 2 ** 60) if m.denominator > 2 ** 64 else m
        if not (a < m < b):
            break
        fm = _sign(evaluate(p, m))
        if fm == 0:
            return m
        if fm == fb:
            b = m
        else:
            a = m
    return (a + b) / 2


def real_roots(p: UPoly, lo, hi, rel_tol: float = 2.0 ** -60) -> list[float]:
    """Sorted distinct real roots of ``p`` in ``(lo, hi]``, as floats."""
    sf = squarefree(p)
    return [float(refine_root(sf, a, b, rel_tol)) for a, b in isolate_real_roots(sf, lo, hi)]


# -- polynomials with polynomial coefficients -------------------------------

def resultant(P: list[UPoly], Q: list[UPoly]) -> UPoly:
    """Resultant in the outer variable of two polynomials with coefficients in Q[y].

    ``P`` and ``Q`` are coefficient lists (lowest degree first) whose
    entries are :data:`UPoly`.  Uses fraction-free (Bareiss) elimination on
    the Sylvester matrix.
    """
    P = _trim_outer(P)
    Q = _trim_outer(Q)
    m, n = len(P) - 1, len(Q) - 1
    if m < 0 or n < 0:
        return []
    if m == 0:
        return _upow(P[0], n)
    if n == 0:
        return _upow(Q[0], m)
    size = m + n
    M = [[[] for _ in range(size)] for _ in range(size)]
    for r in range(n):
        for i, c in enumerate(reversed(P)):
            M[r][r + i] = list(c)
    for r in range(m):
        for i, c in enumerate(reversed(Q)):
            M[n + r][r + i] = list(c)
    sign = 1
    prev: UPoly = [Fraction(1)]
    for k in range(size - 1):
        if not M[k][k]:
            swap = next((r for r in range(k + 1, size) if M[r][k]), None)
            if swap is None:
                return []
            M[k], M[swap] = M[swap], M[k]
            sign = -sign
        for i in range(k + 1, size):
            for j in range(k + 1, size):
                num = sub(mul(M[i][j], M[k][k]), mul(M[i][k], M[k][j]))
                M[i][j] = exact_div(num, prev)
            M[i][k] = []
        prev = M[k][k]
    det = M[size - 1][size - 1]
    return det if sign > 0 else [-c for c in det]


def _trim_outer(P):
    P = [trim(c) for c in P]
    while P and not P[-1]:
        P.pop()
    return P


def _upow(p: UPoly, k: int) -> UPoly:
    out = [Fraction(1)]
    for _ in range(k):
        out = mul(out, p)
    return out
