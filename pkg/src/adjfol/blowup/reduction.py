"""Seidenberg reduction of a polynomial germ at the origin.

Every point is handled in local coordinates (u, v) with the point at the
origin; exceptional curves through it are coordinate axes, recorded as
(curve id, axis) with axis 0 for {u = 0} and axis 1 for {v = 0}.  Blowing up
the origin uses the two charts

    x-chart: (x, y) = (u, u v)      y-chart: (x, y) = (u v, u)

so the new curve is {u = 0} in both.  Points of the new curve are taken at
finite v in the x-chart, plus the origin of the y-chart (v = infinity).
Singular points at irrational v are kept together as one cluster per
irreducible factor and analysed in Q[v]/(f).

Ledgers: the lifted field is divided by u^k with k maximal; the new curve
gets K_F coefficient -k plus the coefficients of the curves through the
centre, and K_X coefficient 1 plus theirs.
"""
from __future__ import annotations

import enum
import itertools
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import sympy

from ..exactnum import EpsAffine, as_rational
from ..graph import Curve, DecoratedGraph, Divisor
from .poly import (BivariatePoly, PolyVectorField, conjugate_trace, divides, rational_root,
                    uni_factor, uni_order, uni_to_sympy)

__all__ = [
    "Status",
    "ReductionError",
    "SingularityInfo",
    "Point",
    "BlowupRecord",
    "ResolutionTree",
    "singularity_info",
    "is_reduced",
    "reduce",
    "ledger_discrepancies",
    "index_table",
    "extract_graph",
    "camacho_sad_check",
    "chart_consistency",
    "kx_adjunction_failures",
]

U = BivariatePoly.x()
V = BivariatePoly.y()


class Status(enum.Enum):
    REGULAR = "REGULAR"
    REDUCED_NONDEGENERATE = "REDUCED_NONDEGENERATE"
    REDUCED_SADDLE_NODE = "REDUCED_SADDLE_NODE"
    NON_REDUCED = "NON_REDUCED"

    @property
    def reduced(self) -> bool:
        return self is not Status.NON_REDUCED


class ReductionError(RuntimeError):
    def __init__(self, code: str, msg: str):
        super().__init__(f"{code}: {msg}")
        self.code = code


def _is_square(q: Fraction) -> bool:
    if q < 0:
        return False
    return sympy.sqrt(sympy.Rational(q.numerator, q.denominator)).is_Rational


def _sqrt(q: Fraction) -> Fraction:
    r = sympy.sqrt(sympy.Rational(q.numerator, q.denominator))
    return Fraction(int(r.p), int(r.q))


@dataclass(frozen=True)
class SingularityInfo:
    """Linear data of the field at a point.

    For a cluster of conjugate irrational points trace and det are None and
    ``ratio_invariant`` (trace^2/det when rational) carries what is needed.
    """

    location: str
    value: tuple  # field value at the point
    trace: Optional[Fraction]
    det: Optional[Fraction]
    disc_square: Optional[bool]
    eigenvalues: Optional[tuple]
    status: Status
    ratio_invariant: Optional[Fraction] = None
    conjugates: int = 1

    @classmethod
    def from_matrix(cls, m, location: str = "", value=(0, 0)) -> "SingularityInfo":
        (a, b), (c, d) = [[as_rational(x) for x in row] for row in m]
        value = tuple(as_rational(x) for x in value)
        tr, det = a + d, a * d - b * c
        disc = tr * tr - 4 * det
        sq = _is_square(disc)
        eig = None
        if sq:
            r = _sqrt(disc)
            eig = tuple(sorted(((tr + r) / 2, (tr - r) / 2), reverse=True))
        ratio = tr * tr / det if det else None
        info = cls(location, value, tr, det, sq, eig, Status.REGULAR, ratio)
        return cls(location, value, tr, det, sq, eig, is_reduced(info), ratio)

    def to_json(self) -> dict:
        d = {"location": self.location, "status": self.status.value}
        if self.trace is not None:
            d.update(trace=str(self.trace), det=str(self.det), disc_square=self.disc_square)
        if self.eigenvalues is not None:
            d["eigenvalues"] = [str(x) for x in self.eigenvalues]
        if self.conjugates > 1:
            d["conjugates"] = self.conjugates
        return d


def is_reduced(s: SingularityInfo) -> Status:
    """Status from the value and linear part.

    lambda1/lambda2 in Q+ forces rational eigenvalues of the same sign, so
    for a rational linear part the test is: square discriminant and det > 0.
    """
    if any(x != 0 for x in s.value):
        return Status.REGULAR
    if s.trace is None:
        return s.status
    if s.det == 0:
        return Status.NON_REDUCED if s.trace == 0 else Status.REDUCED_SADDLE_NODE
    if s.disc_square and s.det > 0:
        return Status.NON_REDUCED
    return Status.REDUCED_NONDEGENERATE


def singularity_info(a: BivariatePoly, b: BivariatePoly, location: str = "") -> SingularityInfo:
    m = ((a.coeff(1, 0), a.coeff(0, 1)), (b.coeff(1, 0), b.coeff(0, 1)))
    return SingularityInfo.from_matrix(m, location, (a.coeff(0, 0), b.coeff(0, 0)))


def _cluster_info(a, b, f: sympy.Poly, location: str) -> SingularityInfo:
    """Status at the roots of f on {u = 0}, all conjugate, computed in Q[v]/(f)."""
    t = sympy.Symbol("t")

    def on_curve(p: BivariatePoly):
        return uni_to_sympy(p.restrict(0)) if p.restrict(0) else sympy.Poly(0, t, domain="QQ")

    a0, b0 = on_curve(a), on_curve(b)
    deg = f.degree()
    if not (a0.rem(f).is_zero and b0.rem(f).is_zero):
        return SingularityInfo(location, (1, 0), None, None, None, None, Status.REGULAR, conjugates=deg)
    au, av = on_curve(a.diff(0)), on_curve(a.diff(1))
    bu, bv = on_curve(b.diff(0)), on_curve(b.diff(1))
    tr = (au + bv).rem(f)
    det = (au * bv - av * bu).rem(f)
    if det.is_zero:
        st = Status.NON_REDUCED if tr.is_zero else Status.REDUCED_SADDLE_NODE
        return SingularityInfo(location, (0, 0), None, None, None, None, st, conjugates=deg)
    c = (tr * tr * sympy.invert(det, f)).rem(f)
    ratio = None
    st = Status.REDUCED_NONDEGENERATE
    if c.degree() <= 0:
        cq = sympy.Rational(c.as_expr())
        ratio = Fraction(int(cq.p), int(cq.q))
        # lambda1/lambda2 = q solves q^2 + (2 - c) q + 1 = 0
        if ratio > 2 and _is_square(ratio * (ratio - 4)):
            st = Status.NON_REDUCED
    return SingularityInfo(location, (0, 0), None, None, None, None, st, ratio, deg)


@dataclass
class Point:
    pid: int
    location: str
    a: BivariatePoly
    b: BivariatePoly
    curves: list  # (curve id, axis)
    depth: int
    info: SingularityInfo
    cluster: Optional[sympy.Poly] = None  # conjugate roots of cluster on axis 0
    blown_up: Optional[str] = None

    @property
    def final(self) -> bool:
        return self.blown_up is None

    def to_json(self) -> dict:
        d = {"id": self.pid, "location": self.location, "curves": [c for c, _ in self.curves],
             "status": self.info.status.value, "depth": self.depth}
        if self.blown_up:
            d["blown_up"] = self.blown_up
        return d


@dataclass(frozen=True)
class BlowupRecord:
    curve: str
    center: int  # point id
    location: str
    through: tuple  # curves through the centre
    multiplicity: int  # a(q), algebraic multiplicity of the field at the centre
    k: int  # power of u divided out
    invariant: bool
    charts: tuple  # ((U, V) x-chart, (U, V) y-chart) after division

    @property
    def l(self) -> int:
        return self.multiplicity + (0 if self.invariant else 1)

    def to_json(self) -> dict:
        return {"curve": self.curve, "center": self.center, "location": self.location,
                "through": list(self.through), "a": self.multiplicity, "l": self.l, "k": self.k,
                "invariant": self.invariant,
                "x_chart": [str(p) for p in self.charts[0]], "y_chart": [str(p) for p in self.charts[1]]}


@dataclass
class ResolutionTree:
    vf: PolyVectorField
    records: list = field(default_factory=list)
    points: list = field(default_factory=list)
    kf: dict = field(default_factory=dict)
    kx: dict = field(default_factory=dict)
    self_int: dict = field(default_factory=dict)
    invariant: dict = field(default_factory=dict)
    edges: set = field(default_factory=set)

    @property
    def curves(self) -> list[str]:
        return [r.curve for r in self.records]

    @property
    def n_blowups(self) -> int:
        return len(self.records)

    def final_points(self) -> list[Point]:
        return [p for p in self.points if p.final]

    def singularities(self) -> list[Point]:
        return [p for p in self.final_points() if p.info.status is not Status.REGULAR]

    def mult(self, a: str, b: str) -> int:
        return 1 if (min(a, b, key=self._order), max(a, b, key=self._order)) in self.edges else 0

    def _order(self, c):
        return self.curves.index(c)

    def to_json(self) -> dict:
        return {
            "field": self.vf.to_json(),
            "blowups": len(self.records),
            "records": [r.to_json() for r in self.records],
            "curves": [{"id": c, "self": self.self_int[c], "invariant": self.invariant[c],
                        "kf": self.kf[c], "kx": self.kx[c]} for c in self.curves],
            "edges": sorted([list(e) for e in self.edges], key=lambda e: (self._order(e[0]), self._order(e[1]))),
            "singularities": [p.info.to_json() for p in self.singularities()],
        }


def _ord(p: BivariatePoly) -> Optional[int]:
    return p.order()


def _min_opt(*vals):
    vals = [v for v in vals if v is not None]
    return min(vals) if vals else None


def _lift(a: BivariatePoly, b: BivariatePoly):
    """Both chart transforms of the field, before division."""
    ux, vx = U, U * V  # x-chart
    ax, bx = a.subs(ux, vx), b.subs(ux, vx)
    x_chart = (ax, (bx - V * ax).divide_power(0, 1))
    uy, vy = U * V, U  # y-chart
    ay, by = a.subs(uy, vy), b.subs(uy, vy)
    y_chart = (by, (ay - V * by).divide_power(0, 1))
    return x_chart, y_chart


def _divide(chart, k):
    return tuple(p.divide_power(0, k) for p in chart)


class _Reducer:
    def __init__(self, vf: PolyVectorField, max_depth: int):
        self.tree = ResolutionTree(vf)
        self.max_depth = max_depth
        self.queue: deque = deque()

    def add_point(self, loc, a, b, curves, depth, cluster=None, info=None) -> Point:
        if info is None:
            info = singularity_info(a, b, loc)
        p = Point(len(self.tree.points), loc, a, b, curves, depth, info, cluster)
        self.tree.points.append(p)
        if info.status is Status.NON_REDUCED:
            if cluster is not None:
                raise ReductionError("IRRATIONAL_CENTER",
                                     f"non-reduced points at the roots of {cluster.as_expr()} ({loc})")
            if depth >= self.max_depth:
                raise ReductionError("DEPTH_EXCEEDED", f"depth {self.max_depth} reached at {loc}")
            self.queue.append(p)
        return p

    def run(self) -> ResolutionTree:
        vf = self.tree.vf
        self.add_point("origin", vf.a, vf.b, [], 0)
        while self.queue:
            self.blow_up(self.queue.popleft())
        return self.tree

    def blow_up(self, p: Point):
        t = self.tree
        a, b = p.a, p.b
        m = _min_opt(_ord(a), _ord(b))
        xc, yc = _lift(a, b)
        k = _min_opt(*(q.order_in(0) for q in xc))
        k_y = _min_opt(*(q.order_in(0) for q in yc))
        if k != k_y:
            raise ReductionError("CHART_MISMATCH", f"divided powers differ ({k} vs {k_y}) at {p.location}")
        xc, yc = _divide(xc, k), _divide(yc, k)
        invariant = not xc[0].restrict(0)
        cid = f"E{len(t.records) + 1}"
        through = tuple(c for c, _ in p.curves)
        t.records.append(BlowupRecord(cid, p.pid, p.location, through, m, k, invariant, (xc, yc)))
        p.blown_up = cid

        t.kf[cid] = -k + sum(t.kf[c] for c in through)
        t.kx[cid] = 1 + sum(t.kx[c] for c in through)
        for c in through:
            t.self_int[c] -= 1
        t.self_int[cid] = -1
        t.invariant[cid] = invariant
        if len(through) == 2:
            t.edges.discard(self._edge(*through))
        for c in through:
            t.edges.add(self._edge(c, cid))

        old_y0 = [c for c, ax in p.curves if ax == 1]  # meets the new curve at v = 0
        old_x0 = [c for c, ax in p.curves if ax == 0]  # meets it at v = infinity
        depth = p.depth + 1

        # x-chart, finite v
        U1, V1 = xc
        poly = V1.restrict(0) if invariant else U1.restrict(0)
        roots = set()
        if poly:
            for f, _ in uni_factor(poly):
                c = rational_root(f)
                if c is not None:
                    roots.add(c)
                else:
                    loc = f"{cid} x-chart, roots of {f.as_expr()}"
                    self.add_point(loc, U1, V1, [(cid, 0)], depth, cluster=f,
                                   info=_cluster_info(U1, V1, f, loc))
        if old_y0:
            roots.add(Fraction(0))
        for c in sorted(roots):
            loc = f"{cid} x-chart, v = {c}"
            curves = [(cid, 0)] + ([(old_y0[0], 1)] if c == 0 and old_y0 else [])
            self.add_point(loc, U1.translate(0, c), V1.translate(0, c), curves, depth)

        # y-chart origin
        U2, V2 = yc
        poly2 = V2.restrict(0) if invariant else U2.restrict(0)
        if old_x0 or uni_order(poly2) > 0:
            loc = f"{cid} y-chart, v = 0"
            curves = [(cid, 0)] + ([(old_x0[0], 1)] if old_x0 else [])
            self.add_point(loc, U2, V2, curves, depth)

    def _edge(self, a, b):
        order = {c: i for i, c in enumerate(self.tree.curves)}
        return (a, b) if order[a] < order[b] else (b, a)


def reduce(vf: PolyVectorField, max_depth: int = 32) -> ResolutionTree:
    """Blow up non-reduced points until every point is regular or reduced."""
    if not vf.is_saturated():
        vf = vf.saturate()
    return _Reducer(vf, max_depth).run()


# reading the tree


def ledger_discrepancies(t: ResolutionTree, e=None) -> Divisor:
    """kf_i + e*kx_i per curve; symbolic in e when e is None."""
    coeffs = [(c, EpsAffine(t.kf[c], t.kx[c])) for c in t.curves]
    if e is not None:
        e = as_rational(e)
        coeffs = [(c, EpsAffine(v.at(e))) for c, v in coeffs]
    return Divisor(tuple(coeffs))


def _local_index(p: Point, cid: str, axis: int, invariant: bool) -> int:
    """Z (invariant) or tang (non-invariant) of the curve at p.

    Z is the vanishing order of the field restricted to the curve, tang the
    vanishing order of its transverse component along the curve.
    """
    if p.cluster is not None:
        comp = p.b if invariant else p.a
        restricted = comp.restrict(0)
        mult = 0
        f = uni_to_sympy(restricted)
        while f.rem(p.cluster).is_zero and not f.is_zero:
            f = f.quo(p.cluster)
            mult += 1
        return mult * p.cluster.degree()
    if axis == 0:
        comp = p.b if invariant else p.a
        restricted = comp.restrict(0)
    else:
        comp = p.a if invariant else p.b
        restricted = comp.restrict(1)
    o = uni_order(restricted)
    if o is None:
        raise ReductionError("UNSUPPORTED_LOCAL_DATA", f"{cid} is singular along its length at {p.location}")
    return o


def index_table(t: ResolutionTree) -> dict:
    """Per curve: K_F.C from the ledger and Z/tang both directly and from the ledger."""
    direct = {c: 0 for c in t.curves}
    for p in t.final_points():
        for cid, axis in p.curves:
            direct[cid] += _local_index(p, cid, axis, t.invariant[cid])
    out = {}
    for c in t.curves:
        kf_dot = sum(t.kf[d] * (t.self_int[c] if d == c else t.mult(c, d)) for d in t.curves)
        ledger = kf_dot + 2 if t.invariant[c] else kf_dot + t.self_int[c]
        out[c] = {"kind": "z" if t.invariant[c] else "tang", "kf_dot": kf_dot,
                  "direct": direct[c], "ledger": ledger}
    return out


def extract_graph(t: ResolutionTree) -> DecoratedGraph:
    table = index_table(t)
    curves = []
    for c in t.curves:
        row = table[c]
        if row["direct"] != row["ledger"]:
            raise ReductionError("INDEX_MISMATCH",
                                 f"{c}: {row['kind']} is {row['direct']} locally but {row['ledger']} from the ledger")
        if t.invariant[c]:
            curves.append(Curve(c, t.self_int[c], True, z=row["ledger"]))
        else:
            curves.append(Curve(c, t.self_int[c], False, tang=row["ledger"]))
    return DecoratedGraph(tuple(curves), tuple((a, b, 1) for a, b in sorted(t.edges)))


def _cs_local(p: Point, axis: int) -> Optional[Fraction]:
    """Camacho-Sad index of the invariant axis at a nondegenerate point."""
    if p.cluster is not None:
        g = p.a.divide_power(0, 1).restrict(0)  # transverse eigenvalue: a = u*g on {u=0}
        tang = p.b.diff(1).restrict(0)
        return conjugate_trace(g, tang, p.cluster)
    ux, uy = p.a.coeff(1, 0), p.a.coeff(0, 1)
    vx, vy = p.b.coeff(1, 0), p.b.coeff(0, 1)
    if axis == 0:
        return Fraction(ux) / vy
    return Fraction(vy) / ux


def camacho_sad_check(t: ResolutionTree) -> list[dict]:
    """Sum of Camacho-Sad indices against the self-intersection, per invariant curve."""
    out = []
    for c in t.curves:
        if not t.invariant[c]:
            continue
        total = Fraction(0)
        skipped = None
        for p in t.final_points():
            axes = [ax for cid, ax in p.curves if cid == c]
            if not axes:
                continue
            st = p.info.status
            if st is Status.REGULAR:
                continue
            if st is Status.REDUCED_SADDLE_NODE:
                skipped = f"saddle-node at {p.location}"
                break
            total += _cs_local(p, axes[0])
        if skipped:
            out.append({"curve": c, "status": "SKIPPED", "reason": skipped, "self": t.self_int[c]})
        else:
            out.append({"curve": c, "status": "OK" if total == t.self_int[c] else "MISMATCH",
                        "sum": str(total), "self": t.self_int[c]})
    return out


def chart_consistency(t: ResolutionTree) -> list[str]:
    """Points at v = c (c != 0) in the x-chart against v = 1/c in the y-chart."""
    bad = []
    for r in t.records:
        (U1, V1), (U2, V2) = r.charts
        poly = V1.restrict(0) if r.invariant else U1.restrict(0)
        if not poly:
            continue
        for f, _ in uni_factor(poly):
            c = rational_root(f)
            if c is None or c == 0:
                continue
            s1 = singularity_info(U1.translate(0, c), V1.translate(0, c))
            s2 = singularity_info(U2.translate(0, 1 / c), V2.translate(0, 1 / c))
            if s1.status is not s2.status or s1.ratio_invariant != s2.ratio_invariant:
                bad.append(f"{r.curve} at v = {c}: {s1.status.value} vs {s2.status.value}")
    return bad


def kx_adjunction_failures(t: ResolutionTree) -> list[str]:
    """K_X.E = -2 - E^2 for every smooth rational exceptional curve, from the kx ledger."""
    bad = []
    for c in t.curves:
        dot = sum(t.kx[d] * (t.self_int[c] if d == c else t.mult(c, d)) for d in t.curves)
        if dot != -2 - t.self_int[c]:
            bad.append(f"{c}: K_X.E = {dot}, expected {-2 - t.self_int[c]}")
    return bad
