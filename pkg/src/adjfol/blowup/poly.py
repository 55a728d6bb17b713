"""Sparse bivariate polynomials over Q and vector fields built from them.

Arithmetic is done here on dicts of exponent pairs; gcd, factoring and
root finding are delegated to sympy.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional

import sympy

from ..exactnum import as_rational

_X, _Y = sympy.symbols("x y")
_T = sympy.Symbol("t")


class BivariatePoly:
    """Polynomial in x, y with Fraction coefficients; zero coefficients are never stored."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        clean = {}
        for (i, j), c in (terms or {}).items():
            c = as_rational(c)
            if i < 0 or j < 0:
                raise ValueError("negative exponent")
            if c:
                clean[(int(i), int(j))] = clean.get((int(i), int(j)), Fraction(0)) + c
        self.terms = {k: v for k, v in clean.items() if v}

    # constructors

    @classmethod
    def const(cls, c) -> "BivariatePoly":
        return cls({(0, 0): c})

    @classmethod
    def x(cls) -> "BivariatePoly":
        return cls({(1, 0): 1})

    @classmethod
    def y(cls) -> "BivariatePoly":
        return cls({(0, 1): 1})

    @classmethod
    def lift(cls, v) -> "BivariatePoly":
        return v if isinstance(v, BivariatePoly) else cls.const(v)

    # basic protocol

    def __eq__(self, other):
        if not isinstance(other, BivariatePoly):
            try:
                other = BivariatePoly.const(other)
            except (TypeError, ValueError):
                return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __bool__(self):
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def __repr__(self):
        return f"BivariatePoly({self})"

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for (i, j), c in sorted(self.terms.items(), key=lambda t: (t[0][0] + t[0][1], t[0])):
            mono = "*".join(m for m in (_mono("x", i), _mono("y", j)) if m)
            if not mono:
                s = str(c)
            elif c == 1:
                s = mono
            elif c == -1:
                s = "-" + mono
            else:
                s = f"{c}*{mono}"
            parts.append(s)
        return " + ".join(parts).replace("+ -", "- ")

    # arithmetic

    def __add__(self, other):
        other = BivariatePoly.lift(other)
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, Fraction(0)) + v
        return BivariatePoly(out)

    __radd__ = __add__

    def __neg__(self):
        return BivariatePoly({k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-BivariatePoly.lift(other))

    def __rsub__(self, other):
        return BivariatePoly.lift(other) - self

    def __mul__(self, other):
        other = BivariatePoly.lift(other)
        out: dict = {}
        for (i, j), a in self.terms.items():
            for (k, l), b in other.terms.items():
                key = (i + k, j + l)
                out[key] = out.get(key, Fraction(0)) + a * b
        return BivariatePoly(out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative power")
        out = BivariatePoly.const(1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    # queries

    def coeff(self, i: int, j: int) -> Fraction:
        return self.terms.get((i, j), Fraction(0))

    def order(self) -> Optional[int]:
        """Lowest total degree, None for the zero polynomial."""
        return min((i + j for i, j in self.terms), default=None)

    def degree(self) -> Optional[int]:
        return max((i + j for i, j in self.terms), default=None)

    def order_in(self, var: int) -> Optional[int]:
        """Largest k with x^k (var 0) or y^k (var 1) dividing the polynomial."""
        return min((e[var] for e in self.terms), default=None)

    def homogeneous(self, d: int) -> "BivariatePoly":
        return BivariatePoly({k: v for k, v in self.terms.items() if k[0] + k[1] == d})

    def __call__(self, x, y):
        return sum((c * x ** i * y ** j for (i, j), c in self.terms.items()), Fraction(0))

    def diff(self, var: int) -> "BivariatePoly":
        out = {}
        for (i, j), c in self.terms.items():
            e = (i, j)[var]
            if e:
                out[(i - 1, j) if var == 0 else (i, j - 1)] = c * e
        return BivariatePoly(out)

    def subs(self, xp, yp) -> "BivariatePoly":
        """Substitute polynomials for x and y."""
        xp, yp = BivariatePoly.lift(xp), BivariatePoly.lift(yp)
        xpow, ypow = {0: BivariatePoly.const(1)}, {0: BivariatePoly.const(1)}

        def pw(cache, base, n):
            if n not in cache:
                cache[n] = pw(cache, base, n - 1) * base
            return cache[n]

        out = BivariatePoly()
        for (i, j), c in self.terms.items():
            out = out + pw(xpow, xp, i) * pw(ypow, yp, j) * c
        return out

    def translate(self, a=0, b=0) -> "BivariatePoly":
        """p(x + a, y + b)."""
        return self.subs(BivariatePoly.x() + a, BivariatePoly.y() + b)

    def divide_power(self, var: int, k: int) -> "BivariatePoly":
        """Exact division by x^k (var 0) or y^k (var 1)."""
        if k == 0:
            return self
        out = {}
        for (i, j), c in self.terms.items():
            e = (i, j)[var]
            if e < k:
                raise ValueError("not divisible")
            out[(i - k, j) if var == 0 else (i, j - k)] = c
        return BivariatePoly(out)

    def restrict(self, var: int, value=0) -> dict:
        """Univariate restriction {power: coeff}: var 0 sets x = value (result in y)."""
        out: dict = {}
        value = as_rational(value)
        for (i, j), c in self.terms.items():
            fixed, free = (i, j) if var == 0 else (j, i)
            term = c * value ** fixed if fixed else c
            if term:
                out[free] = out.get(free, Fraction(0)) + term
        return {k: v for k, v in out.items() if v}

    # sympy bridge

    def to_sympy(self) -> sympy.Expr:
        return sum((sympy.Rational(c.numerator, c.denominator) * _X ** i * _Y ** j
                    for (i, j), c in self.terms.items()), sympy.Integer(0))

    @classmethod
    def from_sympy(cls, expr) -> "BivariatePoly":
        p = sympy.Poly(expr, _X, _Y, domain="QQ")
        return cls({m: Fraction(int(c.numerator), int(c.denominator)) for m, c in p.terms()})


def _mono(v: str, e: int) -> str:
    if e == 0:
        return ""
    return v if e == 1 else f"{v}^{e}"


def poly_gcd(a: BivariatePoly, b: BivariatePoly) -> BivariatePoly:
    return BivariatePoly.from_sympy(sympy.gcd(a.to_sympy(), b.to_sympy()))


def poly_div_exact(a: BivariatePoly, d: BivariatePoly) -> BivariatePoly:
    q, r = sympy.div(sympy.Poly(a.to_sympy(), _X, _Y, domain="QQ"), sympy.Poly(d.to_sympy(), _X, _Y, domain="QQ"))
    if not r.is_zero:
        raise ValueError("inexact division")
    return BivariatePoly.from_sympy(q.as_expr())


# univariate helpers (polynomials as {power: Fraction})


def uni_to_sympy(u: dict) -> sympy.Poly:
    expr = sum((sympy.Rational(c.numerator, c.denominator) * _T ** k for k, c in u.items()), sympy.Integer(0))
    return sympy.Poly(expr, _T, domain="QQ")


def uni_order(u: dict) -> Optional[int]:
    """Vanishing order at 0; None for the zero polynomial."""
    return min(u, default=None)


def uni_factor(u: dict) -> list[tuple[sympy.Poly, int]]:
    """Monic irreducible factors over Q with multiplicities (constant dropped)."""
    if not u:
        raise ValueError("zero polynomial")
    _, facs = uni_to_sympy(u).factor_list()
    out = [(f.monic(), m) for f, m in facs if f.degree() > 0]
    out.sort(key=lambda t: (t[0].degree(), [str(c) for c in t[0].all_coeffs()]))
    return out


def rational_root(f: sympy.Poly) -> Optional[Fraction]:
    """Root of a monic linear factor."""
    if f.degree() != 1:
        return None
    c = -f.all_coeffs()[1]
    return Fraction(int(c.p), int(c.q))


def conjugate_trace(num: dict, den: dict, f: sympy.Poly) -> Fraction:
    """Sum of num(t)/den(t) over the roots of the irreducible polynomial f."""
    n, d = uni_to_sympy(num) if num else sympy.Poly(0, _T, domain="QQ"), uni_to_sympy(den)
    inv = sympy.invert(d, f)
    r = (n * inv).rem(f)
    # trace of multiplication by r on Q[t]/(f)
    deg = f.degree()
    total = sympy.Integer(0)
    for k in range(deg):
        col = (r * sympy.Poly(_T ** k, _T, domain="QQ")).rem(f)
        coeffs = col.all_coeffs()[::-1]
        if k < len(coeffs):
            total += coeffs[k]
    total = sympy.Rational(total)
    return Fraction(int(total.p), int(total.q))


def residue_is_rational(num: dict, den: dict, f: sympy.Poly) -> Optional[Fraction]:
    """num/den reduced mod f, if that element of Q[t]/(f) is a rational constant."""
    n = uni_to_sympy(num) if num else sympy.Poly(0, _T, domain="QQ")
    r = (n * sympy.invert(uni_to_sympy(den), f)).rem(f)
    if r.degree() <= 0:
        c = sympy.Rational(r.as_expr())
        return Fraction(int(c.p), int(c.q))
    return None


def divides(f: sympy.Poly, u: dict) -> bool:
    if not u:
        return True
    return uni_to_sympy(u).rem(f).is_zero


@dataclass(frozen=True)
class PolyVectorField:
    """a d/dx + b d/dy with coprime components."""

    a: BivariatePoly
    b: BivariatePoly

    def __post_init__(self):
        if self.a.is_zero() and self.b.is_zero():
            raise ValueError("zero vector field")

    @classmethod
    def from_form(cls, p: BivariatePoly, q: BivariatePoly) -> "PolyVectorField":
        """The field annihilating the 1-form p dx + q dy, i.e. (q, -p)."""
        return cls(q, -p).saturate()

    def saturate(self) -> "PolyVectorField":
        if self.a.is_zero():
            return PolyVectorField(BivariatePoly(), _normalize(self.b))
        if self.b.is_zero():
            return PolyVectorField(_normalize(self.a), BivariatePoly())
        g = poly_gcd(self.a, self.b)
        if g.degree() == 0:
            return self
        return PolyVectorField(poly_div_exact(self.a, g), poly_div_exact(self.b, g))

    def is_saturated(self) -> bool:
        if self.a.is_zero() or self.b.is_zero():
            other = self.b if self.a.is_zero() else self.a
            return other.degree() == 0
        return poly_gcd(self.a, self.b).degree() == 0

    def singular_at_origin(self) -> bool:
        return self.a.coeff(0, 0) == 0 and self.b.coeff(0, 0) == 0

    def to_json(self) -> dict:
        return {"a": str(self.a), "b": str(self.b)}

    def __str__(self):
        return f"({self.a}) d/dx + ({self.b}) d/dy"


def _normalize(p: BivariatePoly) -> BivariatePoly:
    """A single nonzero component generates the same foliation as the constant 1."""
    return BivariatePoly.const(1)


def lin_part(a: BivariatePoly, b: BivariatePoly) -> tuple:
    """Jacobian at the origin as ((a_x, a_y), (b_x, b_y))."""
    return ((a.coeff(1, 0), a.coeff(0, 1)), (b.coeff(1, 0), b.coeff(0, 1)))


def poly_sum(items: Iterable[BivariatePoly]) -> BivariatePoly:
    out = BivariatePoly()
    for p in items:
        out = out + p
    return out
