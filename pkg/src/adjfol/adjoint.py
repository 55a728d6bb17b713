"""Adjoint degrees, discrepancies and singularity grading.

Three conventions share one engine:

* ADJOINT:  K = K_F + E^{n-inv} + e (K_X + E)
* FOLIATED: K = K_F + E^{n-inv}            (ADJOINT at e = 0)
* SURFACE:  K = K_X + E

``log`` coefficients a_i solve sum_i a_i E_i.E_j = K.E_j; log canonical means
a_i >= 0.  ``raw`` coefficients b_i are the usual discrepancies, obtained by
subtracting iota + e (ADJOINT), iota (FOLIATED) or 1 (SURFACE).
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .exactnum import EPS, EpsAffine, IntervalSign, as_rational, sign_on_interval
from .graph import DecoratedGraph, Divisor, degrees, intersection_matrix, is_negative_definite
from .linalg import solve_eps

__all__ = [
    "Convention",
    "AdjointContext",
    "DiscrepancyResult",
    "GradeVerdict",
    "NotNegativeDefiniteError",
    "adjoint_degree",
    "assembled_degree",
    "degree_vector",
    "discrepancies",
    "residual",
    "grade",
    "point_grade",
]

GRADES = ("terminal", "canonical", "klt", "lc")


class NotNegativeDefiniteError(ValueError):
    pass


class Convention(enum.Enum):
    ADJOINT = "adjoint"
    FOLIATED = "foliated"
    SURFACE = "surface"

    @classmethod
    def parse(cls, s) -> "Convention":
        if isinstance(s, Convention):
            return s
        return cls(str(s).lower())


@dataclass(frozen=True)
class AdjointContext:
    graph: DecoratedGraph
    convention: Convention = Convention.ADJOINT

    def __post_init__(self):
        object.__setattr__(self, "convention", Convention.parse(self.convention))


def _ctx(ctx_or_graph, convention=None) -> AdjointContext:
    if isinstance(ctx_or_graph, AdjointContext):
        return ctx_or_graph
    return AdjointContext(ctx_or_graph, convention or Convention.ADJOINT)


def adjoint_degree(ctx: AdjointContext, cid: str) -> EpsAffine:
    """K.C from the decorations of C and its neighbours."""
    g = ctx.graph
    c = g.curve(cid)
    d, d1, d2 = degrees(g, cid)
    base = 2 * c.p_a - 2
    conv = ctx.convention
    if conv is Convention.SURFACE:
        return EpsAffine(base + d)
    if c.invariant:
        val = EpsAffine(base + d + c.z - d2, base + d)
    else:
        val = EpsAffine(c.tang + d1, base + d)
    if conv is Convention.FOLIATED:
        return EpsAffine(val.const)
    return val


def assembled_degree(ctx: AdjointContext, cid: str) -> EpsAffine:
    """K.C assembled from K_F.C, K_X.C and intersection numbers.

    Independent of :func:`adjoint_degree`; used as a cross-check.
    """
    g = ctx.graph
    m = intersection_matrix(g)
    i = g.index(cid)
    c = g.curve(cid)
    kx = 2 * c.p_a - 2 - c.self_int
    e_dot = sum(m[i])  # E.C
    if ctx.convention is Convention.SURFACE:
        return EpsAffine(kx + e_dot)
    kf = 2 * c.p_a - 2 + c.z if c.invariant else c.tang - c.self_int
    ninv_dot = sum(m[i][j] for j, x in enumerate(g.curves) if not x.invariant)
    foliated = kf + ninv_dot
    if ctx.convention is Convention.FOLIATED:
        return EpsAffine(foliated)
    return EpsAffine(foliated, kx + e_dot)


def degree_vector(ctx: AdjointContext) -> list[EpsAffine]:
    return [adjoint_degree(ctx, c.id) for c in ctx.graph.curves]


def _offset(ctx: AdjointContext, cid: str) -> EpsAffine:
    """log minus raw coefficient for one curve."""
    c = ctx.graph.curve(cid)
    if ctx.convention is Convention.SURFACE:
        return EpsAffine(1)
    if ctx.convention is Convention.FOLIATED:
        return EpsAffine(c.iota)
    return EpsAffine(c.iota) + EPS


@dataclass(frozen=True)
class DiscrepancyResult:
    log: Divisor
    raw: Divisor
    convention: Convention

    def to_json(self, e=None) -> dict:
        if e is None:
            return {"log": self.log.to_json(), "raw": self.raw.to_json()}
        return {"log": self.log.to_json_at(e), "raw": self.raw.to_json_at(e)}


def discrepancies(ctx, convention=None) -> DiscrepancyResult:
    ctx = _ctx(ctx, convention)
    g = ctx.graph
    m = intersection_matrix(g)
    if g.curves and not is_negative_definite(m):
        raise NotNegativeDefiniteError("intersection matrix is not negative definite")
    ids = g.ids
    a = solve_eps(m, degree_vector(ctx)) if ids else []
    log = Divisor(tuple(zip(ids, a)))
    raw = Divisor(tuple((cid, ai - _offset(ctx, cid)) for cid, ai in zip(ids, a)))
    return DiscrepancyResult(log, raw, ctx.convention)


def residual(ctx, result: DiscrepancyResult) -> list[EpsAffine]:
    """sum_i a_i E_i.E_j - K.E_j for every j; all zero for a correct solve."""
    ctx = _ctx(ctx, result.convention)
    g = ctx.graph
    m = intersection_matrix(g)
    a = result.log.values()
    kc = degree_vector(ctx)
    return [sum((m[i][j] * a[i] for i in range(len(a))), EpsAffine()) - kc[j] for j in range(len(a))]


@dataclass(frozen=True)
class GradeVerdict:
    terminal: bool
    canonical: bool
    klt: bool
    lc: bool
    witnesses: dict = field(default_factory=dict)  # grade -> first failing curve id
    where: str = ""
    delta: Optional[Fraction] = None
    delta_lc: Optional[bool] = None

    def as_dict(self) -> dict:
        out = {g: getattr(self, g) for g in GRADES}
        return out

    def to_json(self) -> dict:
        d = {"where": self.where, **self.as_dict(),
             "witnesses": {k: v for k, v in self.witnesses.items() if v is not None}}
        if self.delta is not None:
            d["delta"] = str(self.delta)
            d["delta_lc"] = self.delta_lc
        return d


def _verdict(ctx, result, test_nonneg, test_pos, where, delta=None) -> GradeVerdict:
    ids = ctx.graph.ids
    log = result.log.values()
    raw = result.raw.values()

    def first(pred, vals):
        for cid, v in zip(ids, vals):
            if not pred(v):
                return cid
        return None

    w = {
        "lc": first(test_nonneg, log),
        "klt": first(test_pos, log),
        "canonical": first(test_nonneg, raw),
        "terminal": first(test_pos, raw),
    }
    delta_lc = None
    if delta is not None:
        delta = as_rational(delta)
        # raw b_i >= (iota + e)(delta - 1), i.e. log a_i >= delta * (iota + e)
        shifted = [a - _offset(ctx, cid) * delta for cid, a in zip(ids, log)]
        delta_lc = first(test_nonneg, shifted) is None
    return GradeVerdict(
        terminal=w["terminal"] is None,
        canonical=w["canonical"] is None,
        klt=w["klt"] is None,
        lc=w["lc"] is None,
        witnesses=w,
        where=where,
        delta=delta,
        delta_lc=delta_lc,
    )


def grade(ctx, lo=None, hi=None, delta=None, convention=None, result=None) -> GradeVerdict:
    """Grade on the open interval (lo, hi) of e.

    For FOLIATED and SURFACE the coefficients do not depend on e and the
    interval is ignored.
    """
    ctx = _ctx(ctx, convention)
    result = result or discrepancies(ctx)
    if ctx.convention is not Convention.ADJOINT:
        return point_grade(ctx, 0, delta=delta, result=result)
    lo, hi = as_rational(lo), as_rational(hi)
    if lo >= hi:
        raise ValueError("empty interval")
    nonneg = lambda v: sign_on_interval(v, lo, hi).nonneg  # noqa: E731
    pos = lambda v: sign_on_interval(v, lo, hi) is IntervalSign.ALL_POSITIVE  # noqa: E731
    return _verdict(ctx, result, nonneg, pos, f"({lo}, {hi})", delta)


def point_grade(ctx, e, delta=None, convention=None, result=None) -> GradeVerdict:
    ctx = _ctx(ctx, convention)
    e = as_rational(e)
    result = result or discrepancies(ctx)
    nonneg = lambda v: v.at(e) >= 0  # noqa: E731
    pos = lambda v: v.at(e) > 0  # noqa: E731
    where = f"e = {e}" if ctx.convention is Convention.ADJOINT else ctx.convention.value
    return _verdict(ctx, result, nonneg, pos, where, delta)
