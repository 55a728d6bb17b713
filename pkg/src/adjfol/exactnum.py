"""Exact rational scalars and epsilon-affine values.

Rationals are :class:`fractions.Fraction`.  An :class:`EpsAffine` is a value
``const + eps * e`` that is affine in a formal parameter ``e``.  Since every
linear system in this package has an e-free matrix and an e-affine right hand
side, solutions stay affine, so a sign question over an interval of ``e``
reduces to two endpoint evaluations.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

__all__ = [
    "Rational",
    "EpsAffine",
    "IntervalSign",
    "as_rational",
    "parse_rational",
    "format_rational",
    "eval_at",
    "sign_on_interval",
    "EPS",
    "ZERO",
    "ONE",
]

Rational = Fraction
Scalar = Union[int, Fraction, "EpsAffine"]


def as_rational(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return parse_rational(x)
    raise TypeError(f"not an exact rational: {x!r}")


def parse_rational(text: str) -> Fraction:
    """Parse ``"p"`` or ``"p/q"``.  Decimal notation is refused on purpose."""
    s = text.strip()
    if not s:
        raise ValueError("empty rational")
    if "." in s or "e" in s.lower():
        raise ValueError(f"rationals must be written p/q, got {text!r}")
    if "/" in s:
        num, den = s.split("/", 1)
        return Fraction(int(num), int(den))
    return Fraction(int(s))


def format_rational(x) -> str:
    x = as_rational(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True)
class EpsAffine:
    """The exact value ``const + eps * e``."""

    const: Fraction = Fraction(0)
    eps: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "const", as_rational(self.const))
        object.__setattr__(self, "eps", as_rational(self.eps))

    @classmethod
    def lift(cls, x) -> "EpsAffine":
        if isinstance(x, EpsAffine):
            return x
        return cls(as_rational(x), Fraction(0))

    def __add__(self, other):
        try:
            o = EpsAffine.lift(other)
        except TypeError:
            return NotImplemented
        return EpsAffine(self.const + o.const, self.eps + o.eps)

    __radd__ = __add__

    def __neg__(self):
        return EpsAffine(-self.const, -self.eps)

    def __sub__(self, other):
        try:
            o = EpsAffine.lift(other)
        except TypeError:
            return NotImplemented
        return EpsAffine(self.const - o.const, self.eps - o.eps)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, EpsAffine):
            if other.eps == 0:
                other = other.const
            elif self.eps == 0:
                return other * self.const
            else:
                raise ValueError("product of two non-constant eps-affine values is not affine")
        try:
            k = as_rational(other)
        except TypeError:
            return NotImplemented
        return EpsAffine(self.const * k, self.eps * k)

    __rmul__ = __mul__

    def __truediv__(self, other):
        k = as_rational(other.const if isinstance(other, EpsAffine) and other.eps == 0 else other)
        return EpsAffine(self.const / k, self.eps / k)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.eps == 0 and self.const == other
        if isinstance(other, EpsAffine):
            return self.const == other.const and self.eps == other.eps
        return NotImplemented

    def __hash__(self):
        if self.eps == 0:
            return hash(self.const)
        return hash((self.const, self.eps))

    def is_zero(self) -> bool:
        return self.const == 0 and self.eps == 0

    def at(self, e) -> Fraction:
        return self.const + self.eps * as_rational(e)

    def to_json(self) -> dict:
        return {"const": format_rational(self.const), "eps": format_rational(self.eps)}

    @classmethod
    def from_json(cls, d) -> "EpsAffine":
        if isinstance(d, dict):
            return cls(parse_rational(str(d["const"])), parse_rational(str(d["eps"])))
        return cls(parse_rational(str(d)))

    def __str__(self):
        if self.eps == 0:
            return format_rational(self.const)
        e = self.eps
        if e == 1:
            term = "e"
        elif e == -1:
            term = "-e"
        else:
            term = f"{format_rational(e)}*e"
        if self.const == 0:
            return term
        sign = "-" if term.startswith("-") else "+"
        return f"{format_rational(self.const)} {sign} {term.lstrip('-')}"

    def __repr__(self):
        return f"EpsAffine({format_rational(self.const)}, {format_rational(self.eps)})"


EPS = EpsAffine(0, 1)
ZERO = EpsAffine(0, 0)
ONE = EpsAffine(1, 0)


def eval_at(a, e) -> Fraction:
    """Value of ``a`` at ``eps = e``."""
    return EpsAffine.lift(a).at(e)


class IntervalSign(enum.Enum):
    ALL_POSITIVE = "all_positive"
    ALL_NONNEGATIVE = "all_nonnegative"
    ALL_NEGATIVE = "all_negative"
    ALL_NONPOSITIVE = "all_nonpositive"
    IDENTICALLY_ZERO = "identically_zero"
    MIXED = "mixed"

    @property
    def nonneg(self) -> bool:
        return self in (IntervalSign.ALL_POSITIVE, IntervalSign.ALL_NONNEGATIVE, IntervalSign.IDENTICALLY_ZERO)

    @property
    def positive(self) -> bool:
        return self is IntervalSign.ALL_POSITIVE

    @property
    def nonpos(self) -> bool:
        return self in (IntervalSign.ALL_NEGATIVE, IntervalSign.ALL_NONPOSITIVE, IntervalSign.IDENTICALLY_ZERO)

    @property
    def negative(self) -> bool:
        return self is IntervalSign.ALL_NEGATIVE


def sign_on_interval(a, lo, hi) -> IntervalSign:
    """Sign category of the affine function ``a`` on the open interval (lo, hi).

    An affine function that is not identically zero vanishes at most once, so
    on an open interval it is either strictly signed or changes sign.  The two
    non-strict categories can only arise for non-affine inputs and are kept
    for completeness of the classification.
    """
    lo, hi = as_rational(lo), as_rational(hi)
    if lo >= hi:
        raise ValueError(f"empty interval ({lo}, {hi})")
    a = EpsAffine.lift(a)
    if a.is_zero():
        return IntervalSign.IDENTICALLY_ZERO
    vlo, vhi = a.at(lo), a.at(hi)
    if vlo >= 0 and vhi >= 0:
        # both endpoints >= 0 and a is not identically zero: strictly positive inside
        return IntervalSign.ALL_POSITIVE
    if vlo <= 0 and vhi <= 0:
        return IntervalSign.ALL_NEGATIVE
    return IntervalSign.MIXED
