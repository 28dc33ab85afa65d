"""Recursive-descent parser from text to :class:`ExactPoly`.

Grammar (``^`` binds tighter than unary minus, which binds tighter than
``*``; ``^`` is right-associative; implicit multiplication is rejected)::

    expr   := term (("+" | "-") term)*
    term   := unary ("*" unary)*
    unary  := ("-" | "+") unary | power
    power  := atom ("^" unary)?
    atom   := NUMBER | RATIONAL | DECIMAL | IDENT | "i" | "(" expr ")"
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .exactpoly import ExactPoly, GaussianRational

MAX_EXPONENT = 64
MAX_DEPTH = 100
MAX_TERMS = 200_000
MAX_PRODUCT_WORK = 500_000  # term pairs in one multiplication
MAX_COEFF_BITS = 1 << 20

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<num>\d+/\d+|(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*^()])
""", re.VERBOSE)


class ParseError(ValueError):
    """Parse failure located at a byte offset of the UTF-8 input."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.message = message
        self.offset = offset


@dataclass(frozen=True)
class ExprSource:
    text: str | bytes
    variables: tuple = field(default=())
    field: str = "real"

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        if self.field not in ("real", "complex"):
            raise ValueError(f"unknown field {self.field!r}")
        for v in self.variables:
            if not _IDENT.match(v):
                raise ValueError(f"invalid variable name {v!r}")
            if self.field == "complex" and v == "i":
                raise ValueError("'i' is reserved for the imaginary unit in complex mode")
        if len(set(self.variables)) != len(self.variables):
            raise ValueError("duplicate variable names")


@dataclass
class _Tok:
    kind: str
    text: str
    offset: int  # byte offset


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    pos = 0
    byte = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", byte)
        kind = m.lastgroup
        chunk = m.group()
        if kind != "ws":
            toks.append(_Tok(kind, chunk, byte))
        pos = m.end()
        byte += len(chunk.encode("utf-8"))
    toks.append(_Tok("eof", "", byte))
    return toks


def _coeff_bits(p: ExactPoly) -> int:
    def bits(q: Fraction) -> int:
        return q.numerator.bit_length() + q.denominator.bit_length()
    return max((bits(c.re) + bits(c.im) if isinstance(c, GaussianRational) else bits(c)
                for c, _ in p.terms), default=0)


class _Parser:
    def __init__(self, src: ExprSource, text: str):
        self.src = src
        self.toks = _tokenize(text)
        self.i = 0
        self.depth = 0
        self.vars = src.variables

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def advance(self) -> _Tok:
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, text: str):
        if self.tok.text != text:
            found = "end of input" if self.tok.kind == "eof" else repr(self.tok.text)
            raise ParseError(f"expected {text!r}, found {found}", self.tok.offset)
        return self.advance()

    def enter(self):
        self.depth += 1
        if self.depth > MAX_DEPTH:
            raise ParseError("expression nested too deeply", self.tok.offset)

    def _check(self, p: ExactPoly, offset: int) -> ExactPoly:
        if len(p) > MAX_TERMS:
            raise ParseError(f"expansion exceeds {MAX_TERMS} terms", offset)
        return p

    def parse(self) -> ExactPoly:
        try:
            p = self.expr()
        except RecursionError:
            raise ParseError("expression nested too deeply", self.tok.offset) from None
        if self.tok.kind != "eof":
            t = self.tok
            if t.kind in ("num", "ident") or t.text == "(":
                raise ParseError("implicit multiplication is not allowed; use '*'", t.offset)
            raise ParseError(f"unexpected {t.text!r}", t.offset)
        return p

    def expr(self) -> ExactPoly:
        self.enter()
        p = self.term()
        while self.tok.text in ("+", "-"):
            op = self.advance()
            q = self.term()
            p = self._check(p + q if op.text == "+" else p - q, op.offset)
        self.depth -= 1
        return p

    def term(self) -> ExactPoly:
        p = self.unary()
        while self.tok.text == "*":
            op = self.advance()
            q = self.unary()
            if len(p) * len(q) > MAX_PRODUCT_WORK:
                raise ParseError("product expansion too large", op.offset)
            p = self._check(p * q, op.offset)
        return p

    def unary(self) -> ExactPoly:
        if self.tok.text in ("-", "+"):
            op = self.advance()
            self.enter()
            p = self.unary()
            self.depth -= 1
            return -p if op.text == "-" else p
        return self.power()

    def power(self) -> ExactPoly:
        base = self.atom()
        if self.tok.text != "^":
            return base
        caret = self.advance()
        at = self.tok.offset
        self.enter()
        expo = self.unary()
        self.depth -= 1
        if not expo.is_constant():
            raise ParseError("exponent must be a constant integer", at)
        k = expo.constant_value()
        if isinstance(k, GaussianRational) or k.denominator != 1:
            raise ParseError("exponent must be an integer", at)
        if k < 0:
            raise ParseError("negative exponent", at)
        if k > MAX_EXPONENT:
            raise ParseError(f"exponent {k} exceeds maximum {MAX_EXPONENT}", at)
        k = int(k)
        if base.degree * k > MAX_EXPONENT * 4 or (len(base) > 1 and len(base) ** min(k, 8) > 10 ** 9):
            raise ParseError("power expansion too large", caret.offset)
        if _coeff_bits(base) * k > MAX_COEFF_BITS:
            raise ParseError("power coefficients too large", caret.offset)
        return self._check(base ** k, caret.offset)

    def atom(self) -> ExactPoly:
        t = self.tok
        if t.kind == "num":
            self.advance()
            try:
                value = Fraction(t.text)
            except ZeroDivisionError:
                raise ParseError("zero denominator in rational literal", t.offset) from None
            except ValueError:  # digit count beyond the interpreter's int conversion limit
                raise ParseError("numeric literal too long", t.offset) from None
            return ExactPoly.constant(self.vars, value)
        if t.kind == "ident":
            self.advance()
            if t.text == "i":
                if self.src.field == "complex":
                    return ExactPoly.constant(self.vars, GaussianRational(0, 1))
                if "i" not in self.vars:
                    raise ParseError("'i' is only allowed in complex mode", t.offset)
            if t.text not in self.vars:
                raise ParseError(f"unknown identifier {t.text!r}", t.offset)
            return ExactPoly.var(self.vars, t.text)
        if t.text == "(":
            self.advance()
            p = self.expr()
            self.expect(")")
            return p
        found = "end of input" if t.kind == "eof" else repr(t.text)
        raise ParseError(f"expected a number, variable or '(', found {found}", t.offset)


def parse_expression(src: ExprSource | str, variables: Sequence[str] = (), field: str = "real") -> ExactPoly:
    """Parse ``src`` into a canonical :class:`ExactPoly`.

    ``src`` may be an :class:`ExprSource` or plain text together with
    ``variables`` and ``field``.  Raw bytes are decoded as UTF-8; invalid
    bytes are reported as a :class:`ParseError` at their offset.
    """
    if not isinstance(src, ExprSource):
        src = ExprSource(src, tuple(variables), field)
    text = src.text
    if isinstance(text, (bytes, bytearray)):
        try:
            text = bytes(text).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError("invalid UTF-8", exc.start) from None
    return _Parser(src, text).parse()


def parse_poly(text: str, variables: Sequence[str], field: str = "real") -> ExactPoly:
    return parse_expression(ExprSource(text, tuple(variables), field))
