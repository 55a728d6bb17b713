"""Text front-end for germs.

    form  ::= "omega:" poly "dx" ("+"|"-") poly "dy"
            | "v:" poly "d/dx" ("+"|"-") poly "d/dy"
    poly  ::= sum of products of numbers, x, y, (poly), with ^ for powers

A coefficient may be a rational written with "/" between constants.  A
number directly followed by a variable or parenthesis multiplies it
("2y" is 2*y).
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from .poly import BivariatePoly, PolyVectorField


class ParseError(ValueError):
    def __init__(self, msg: str, pos: int, text: str = ""):
        super().__init__(f"{msg} at position {pos}")
        self.pos = pos
        self.text = text


_TOKEN = re.compile(r"\s*(?:(?P<diff>d/dx|d/dy|dx|dy)|(?P<num>\d+)|(?P<var>[xy])|(?P<op>[-+*/^()]))")


@dataclass
class _Tok:
    kind: str
    val: str
    pos: int


def _tokens(text: str, start: int) -> list[_Tok]:
    out = []
    pos = start
    while pos < len(text):
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos == len(text):
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", pos, text)
        kind = m.lastgroup
        out.append(_Tok(kind, m.group(kind), m.start(kind)))
        pos = m.end()
    out.append(_Tok("end", "", len(text)))
    return out


class _Parser:
    def __init__(self, toks, text):
        self.toks = toks
        self.i = 0
        self.text = text

    def peek(self) -> _Tok:
        return self.toks[self.i]

    def take(self) -> _Tok:
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, kind, val=None) -> _Tok:
        t = self.take()
        if t.kind != kind or (val is not None and t.val != val):
            want = val or kind
            raise ParseError(f"expected {want!r}, found {t.val or 'end of input'!r}", t.pos, self.text)
        return t

    def expr(self) -> BivariatePoly:
        t = self.peek()
        if t.kind == "op" and t.val in "+-":
            self.take()
            out = self.term()
            if t.val == "-":
                out = -out
        else:
            out = self.term()
        while True:
            t = self.peek()
            if t.kind == "op" and t.val in "+-":
                self.take()
                rhs = self.term()
                out = out + rhs if t.val == "+" else out - rhs
            else:
                return out

    def term(self) -> BivariatePoly:
        out = self.power()
        while True:
            t = self.peek()
            if t.kind == "op" and t.val == "*":
                self.take()
                out = out * self.power()
            elif t.kind == "op" and t.val == "/":
                self.take()
                d = self.power()
                if d.is_zero() or d.degree() != 0:
                    raise ParseError("division only by a nonzero constant", t.pos, self.text)
                out = out * BivariatePoly.const(1 / d.coeff(0, 0))
            elif t.kind in ("var",) or (t.kind == "op" and t.val == "("):
                out = out * self.power()
            else:
                return out

    def power(self) -> BivariatePoly:
        base = self.atom()
        t = self.peek()
        if t.kind == "op" and t.val == "^":
            self.take()
            e = self.expect("num")
            return base ** int(e.val)
        return base

    def atom(self) -> BivariatePoly:
        t = self.take()
        if t.kind == "num":
            return BivariatePoly.const(Fraction(int(t.val)))
        if t.kind == "var":
            return BivariatePoly.x() if t.val == "x" else BivariatePoly.y()
        if t.kind == "op" and t.val == "(":
            e = self.expr()
            self.expect("op", ")")
            return e
        if t.kind == "op" and t.val == "-":
            return -self.power()
        raise ParseError(f"unexpected {t.val or 'end of input'!r}", t.pos, self.text)


def parse_poly(text: str) -> BivariatePoly:
    p = _Parser(_tokens(text, 0), text)
    out = p.expr()
    p.expect("end")
    return out


def parse_vf(text: str) -> PolyVectorField:
    """Parse a 1-form or vector field; the result is saturated."""
    s = text.strip()
    offset = len(text) - len(text.lstrip())
    if s.startswith("omega:"):
        first, second = "dx", "dy"
    elif s.startswith("v:"):
        first, second = "d/dx", "d/dy"
    else:
        raise ParseError("expected 'omega:' or 'v:'", offset, text)
    head = s.index(":") + 1
    p = _Parser(_tokens(text, offset + head), text)
    c1 = p.expr()
    p.expect("diff", first)
    sign = p.take()
    if sign.kind != "op" or sign.val not in "+-":
        raise ParseError("expected '+' or '-'", sign.pos, text)
    c2 = p.expr()
    if sign.val == "-":
        c2 = -c2
    p.expect("diff", second)
    p.expect("end")
    if c1.is_zero() and c2.is_zero():
        raise ParseError("zero field", offset, text)
    if first == "dx":
        return PolyVectorField.from_form(c1, c2)
    return PolyVectorField(c1, c2).saturate()
