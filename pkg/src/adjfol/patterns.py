"""Recognizers for the named configurations and the four classifiers.

Every classifier is structural: it decides which listed configuration a
graph has, without grading it.  Grading is the job of :mod:`adjfol.adjoint`,
and the sweeps in :mod:`adjfol.enumeration` compare the two.

Orientation conventions:

* an F-chain is a chain of invariant smooth rational curves of
  self-intersection <= -2 whose Z profile read from the first curve is
  (1, 2, ..., 2);
* the legs of an F-star graph attach to the center through their first curve;
* in the bad-tail families the second arm attaches to the Z = 3 curve through
  its last curve, so the (-1)-F-curve is the tip.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .exactnum import as_rational
from .graph import DecoratedGraph, degrees, det_neg, intersection_matrix

__all__ = [
    "FamilyTag",
    "BlockTag",
    "THEOREMS",
    "recognize_blocks",
    "classify",
    "all_matches",
    "classify_main_lc",
    "classify_main_canonical",
    "classify_surface_lc",
    "classify_foliated_lc",
    "NOT_KLT",
    "is_f_chain",
    "path_order",
    "star_legs",
]

THEOREMS = ("MAIN_LC", "MAIN_CAN", "SURF_LC", "FOL_LC")

# families that the theorems state are lc but not klt
NOT_KLT = {
    "MAIN_LC": {"5", "7", "8-b", "8-c"},
    "SURF_LC": {"elliptic", "nodal", "cycle", "double-fork", "fork-b", "fork-c"},
}

WINDOW_LO = Fraction(1, 5)
WINDOW_HI = Fraction(1, 3)


@dataclass(frozen=True)
class FamilyTag:
    theorem: str
    family: str
    parameters: tuple = ()
    annotations: tuple = ()

    @property
    def code(self) -> str:
        return f"{self.theorem}/{self.family}"

    def to_json(self) -> dict:
        d = {"family": self.code, "parameters": list(self.parameters)}
        if self.annotations:
            d["annotations"] = list(self.annotations)
        return d


@dataclass(frozen=True)
class BlockTag:
    label: str
    curves: tuple
    parameters: tuple = field(default=())

    def to_json(self):
        return {"label": self.label, "curves": list(self.curves), "parameters": list(self.parameters)}


# curve predicates

def _inv_rat(c) -> bool:
    return c.invariant and c.smooth_rational


def _minus1(c) -> bool:
    return _inv_rat(c) and c.z == 1


def _minus2(c) -> bool:
    return _inv_rat(c) and c.z == 2


def _center_curve(c, rational: bool = True) -> bool:
    if c.invariant or c.nodal or c.tang != 0:
        return False
    return c.genus == 0 if rational else True


# topology helpers

def path_order(g: DecoratedGraph, ids: Sequence[str]) -> Optional[list[str]]:
    """The induced subgraph on ``ids`` as a path with simple edges, or None."""
    ids = list(ids)
    s = set(ids)
    if not ids:
        return []
    nb = {v: [w for w, m in g.neighbors(v).items() if w in s] for v in ids}
    for v in ids:
        if any(g.mult(v, w) != 1 for w in nb[v]) or len(nb[v]) > 2:
            return None
    ends = [v for v in ids if len(nb[v]) <= 1]
    if len(ids) == 1:
        return ids
    if len(ends) != 2:
        return None
    start = min(ends, key=g.index)
    order = [start]
    prev = None
    cur = start
    while True:
        nxt = [w for w in nb[cur] if w != prev]
        if not nxt:
            break
        prev, cur = cur, nxt[0]
        order.append(cur)
    return order if len(order) == len(ids) else None


def is_chain_graph(g: DecoratedGraph) -> Optional[list[str]]:
    return path_order(g, g.ids) if g.is_connected() else None


def cycle_order(g: DecoratedGraph) -> Optional[list[str]]:
    """Cyclic order if the whole graph is a cycle (a double edge for length 2)."""
    n = len(g)
    if n < 2 or not g.is_connected():
        return None
    if n == 2:
        a, b = g.ids
        return [a, b] if g.mult(a, b) == 2 else None
    for v in g.ids:
        nb = g.neighbors(v)
        if len(nb) != 2 or any(m != 1 for m in nb.values()):
            return None
    order = [g.ids[0]]
    prev = None
    cur = order[0]
    while True:
        nxt = [w for w in sorted(g.neighbors(cur), key=g.index) if w != prev][0]
        if nxt == order[0]:
            break
        order.append(nxt)
        prev, cur = cur, nxt
    return order if len(order) == n else None


def star_legs(g: DecoratedGraph, center: str) -> Optional[list[list[str]]]:
    """Arms of the graph at ``center``, each ordered from the curve meeting it.

    None unless every component of the complement is a path meeting the
    center once, at an end, with multiplicity 1.
    """
    rest = [c for c in g.ids if c != center]
    legs = []
    for comp in g.components(rest):
        order = path_order(g, comp)
        if order is None:
            return None
        touch = [v for v in comp if g.mult(v, center)]
        if len(touch) != 1 or g.mult(touch[0], center) != 1:
            return None
        t = touch[0]
        if order[0] == t:
            legs.append(order)
        elif order[-1] == t:
            legs.append(order[::-1])
        else:
            return None
    return legs


def is_f_chain(g: DecoratedGraph, order: Sequence[str]) -> bool:
    """Whether ``order`` (first curve first) is an F-chain."""
    if not order:
        return False
    for k, cid in enumerate(order):
        c = g.curve(cid)
        if not _inv_rat(c) or c.self_int > -2:
            return False
        if c.z != (1 if k == 0 else 2):
            return False
    return path_order(g, order) is not None and all(
        g.mult(order[k], order[k + 1]) == 1 for k in range(len(order) - 1))


def _f_chain_orientation(g, ids) -> Optional[list[str]]:
    order = path_order(g, ids)
    if order is None:
        return None
    for o in (order, order[::-1]):
        if is_f_chain(g, o):
            return list(o)
    return None


def _minus2_chain(g, ids) -> bool:
    order = path_order(g, ids)
    return order is not None and all(_minus2(g.curve(c)) for c in order)


def _chain_det(g, order) -> int:
    return det_neg(intersection_matrix(g.subgraph(order)))


def _selfs(g, ids):
    return [g.curve(c).self_int for c in ids]


# block recognition

def _maximal_f_chains(g: DecoratedGraph) -> list[list[str]]:
    found = []

    def ok_next(path, w):
        c = g.curve(w)
        if w in path or not _inv_rat(c) or c.z != 2 or c.self_int > -2:
            return False
        if g.mult(path[-1], w) != 1:
            return False
        return all(g.mult(p, w) == 0 for p in path[:-1])

    def walk(path):
        ext = [w for w in g.neighbors(path[-1]) if ok_next(path, w)]
        if not ext:
            found.append(list(path))
            return
        for w in sorted(ext, key=g.index):
            walk(path + [w])

    for c in g.curves:
        if _inv_rat(c) and c.z == 1 and c.self_int <= -2:
            walk([c.id])
    return found


def recognize_blocks(g: DecoratedGraph) -> list[BlockTag]:
    tags: list[BlockTag] = []
    for c in g.curves:
        if _minus1(c):
            tags.append(BlockTag("MINUS1_F", (c.id,)))
        if _minus2(c):
            tags.append(BlockTag("MINUS2_F", (c.id,)))
        if _inv_rat(c) and c.z == 3 and c.self_int <= -2:
            tails = [w for w in g.neighbors(c.id)
                     if _minus1(g.curve(w)) and g.curve(w).self_int == -2]
            if len(tails) >= 2:
                tags.append(BlockTag("BAD_TAIL", (c.id,), tuple(sorted(tails, key=g.index))))
        if c.invariant and c.nodal and c.z == 0 and degrees(g, c.id)[0] == 0:
            tags.append(BlockTag("EGL_NODAL", (c.id,)))
    for order in _maximal_f_chains(g):
        tags.append(BlockTag("F_CHAIN", tuple(order), (_chain_det(g, order),)))
    cyc = cycle_order(g)
    if cyc and all(_minus2(g.curve(c)) and degrees(g, c)[2] == 2 for c in cyc):
        tags.append(BlockTag("EGL_CYCLE", tuple(cyc)))
    for c in g.curves:
        if _center_curve(c, rational=False):
            legs = star_legs(g, c.id)
            if legs is not None and all(is_f_chain(g, leg) for leg in legs):
                tags.append(BlockTag("STAR_CENTER", (c.id,),
                                     tuple(sorted(_chain_det(g, leg) for leg in legs))))
    order = is_chain_graph(g)
    if order and all(c.smooth_rational and c.self_int <= -2 for c in g.curves):
        tags.append(BlockTag("HJ_CHAIN", tuple(order), (_chain_det(g, order),)))
    return tags


# shared family shapes

def _irreducible(g):
    return g.curves[0] if len(g) == 1 else None


def _fchain_family(g) -> Optional[FamilyTag]:
    """F-chain (family 1) or chain of (-2)-F-curves (family 2)."""
    order = is_chain_graph(g)
    if order is None:
        return None
    f = _f_chain_orientation(g, order)
    if f is not None:
        return FamilyTag("", "1", (_chain_det(g, f),))
    if all(_minus2(g.curve(c)) for c in order):
        return FamilyTag("", "2", (len(order),))
    return None


def _star_chain(g, rational=True) -> Optional[tuple]:
    """(center, left side, right side) for an F-star chain, sides possibly empty."""
    order = is_chain_graph(g)
    if order is None:
        return None
    ninv = [c for c in order if not g.curve(c).invariant]
    if len(ninv) != 1:
        return None
    k = order.index(ninv[0])
    if not _center_curve(g.curve(ninv[0]), rational=rational):
        return None
    left = order[:k][::-1]
    right = order[k + 1:]
    for side in (left, right):
        if side and not is_f_chain(g, side):
            return None
    return ninv[0], left, right


def _egl(g) -> bool:
    c = _irreducible(g)
    if c is not None:
        return c.invariant and c.nodal and c.z == 0
    cyc = cycle_order(g)
    return bool(cyc) and all(_minus2(g.curve(x)) and degrees(g, x)[2] == 2 for x in cyc)


def _badtail_arms(g, center, legs):
    """Match arms at a Z = 3 center to (Theta1, Theta2, rest).

    Theta1 is a single (-1)-F-curve of self -2.  Theta2 is classified as
    'a' (single, self -2), 'b' (single, self -3) or 'c' (the chain
    C - Gamma22 - Gamma21 with Gamma22 a (-2)-F-curve and Gamma21 a
    (-1)-F-curve, both of self -2).  Yields (theta1, theta2, kind, others).
    """
    out = []
    n = len(legs)
    for i in range(n):
        t1 = legs[i]
        if len(t1) != 1 or not _minus1(g.curve(t1[0])) or g.curve(t1[0]).self_int != -2:
            continue
        for j in range(n):
            if j == i:
                continue
            t2 = legs[j]
            kind = None
            if len(t2) == 1 and _minus1(g.curve(t2[0])):
                kind = {-2: "a", -3: "b"}.get(g.curve(t2[0]).self_int)
            elif len(t2) == 2:
                near, tip = g.curve(t2[0]), g.curve(t2[1])
                if _minus2(near) and _minus1(tip) and near.self_int == -2 and tip.self_int == -2:
                    kind = "c"
            if kind is None:
                continue
            others = [legs[k] for k in range(n) if k not in (i, j)]
            out.append((t1, t2, kind, others))
    out.sort(key=lambda t: t[2])
    return out


def _z3_center(g, cid) -> bool:
    c = g.curve(cid)
    return _inv_rat(c) and c.z == 3


def _badtail_family(g):
    """Bad-tail triples and forks: ('3' | '4', kind, center, xi_length) or None."""
    for c in g.curves:
        if not _z3_center(g, c.id):
            continue
        legs = star_legs(g, c.id)
        if legs is None:
            continue
        for t1, t2, kind, others in _badtail_arms(g, c.id, legs):
            if not others:
                return "3", kind, c.id, 0
            if len(others) == 1 and _minus2_chain(g, others[0]):
                return "4", kind, c.id, len(others[0])
    return None


def _window_open(lo, hi) -> bool:
    """Whether the interval (lo, hi) meets [1/5, 1/3)."""
    return hi > WINDOW_LO and lo < WINDOW_HI


EIGHT_A = {(2, 3, 3), (2, 3, 4), (2, 3, 5)}
EIGHT_B = {(2, 3, 6), (2, 4, 4), (3, 3, 3)}


def _star_type_class(types: tuple) -> Optional[str]:
    if len(types) == 3:
        if types[0] == 2 and types[1] == 2:
            return "a"
        if types in EIGHT_A:
            return "a"
        if types in EIGHT_B:
            return "b"
    if len(types) == 4 and types == (2, 2, 2, 2):
        return "c"
    return None


def _f_star_graph(g, rational=True):
    """(center, sorted leg types) when the graph is an F-star graph with >= 3 legs."""
    for c in g.curves:
        if not _center_curve(c, rational=rational):
            continue
        legs = star_legs(g, c.id)
        if legs is None or len(legs) < 3:
            continue
        if all(is_f_chain(g, leg) for leg in legs):
            return c.id, tuple(sorted(_chain_det(g, leg) for leg in legs))
    return None


# classifiers

def _tag(theorem, fam, params=(), notes=()):
    return FamilyTag(theorem, fam, tuple(params), tuple(notes))


def _main_lc_matches(g: DecoratedGraph, lo, hi) -> list[FamilyTag]:
    T = "MAIN_LC"
    out = []
    if len(g) == 0:
        return out
    c = _irreducible(g)
    if c is not None and not c.invariant and c.genus == 1 and not c.nodal and c.tang == 0:
        out.append(_tag(T, "7", (), ("not klt",)))
    if _egl(g):
        out.append(_tag(T, "5", (len(g),), ("not klt",)))
    fc = _fchain_family(g)
    if fc is not None:
        out.append(_tag(T, fc.family, fc.parameters))
    bt = _badtail_family(g)
    if bt is not None:
        fam, kind, center, xi = bt
        if kind == "a" or _window_open(lo, hi):
            params = (g.curve(center).self_int,) + ((xi,) if fam == "4" else ())
            out.append(_tag(T, f"{fam}-{kind}", params))
    sc = _star_chain(g)
    if sc is not None:
        center, left, right = sc
        dets = tuple(_chain_det(g, s) if s else 1 for s in (left, right))
        out.append(_tag(T, "6", dets))
    st = _f_star_graph(g)
    if st is not None:
        center, types = st
        cls = _star_type_class(types)
        if cls is not None:
            notes = ("not klt",) if cls in "bc" else ()
            out.append(_tag(T, f"8-{cls}", types, notes))
    return out


def classify_main_lc(g: DecoratedGraph, lo=0, hi=Fraction(1, 5)) -> Optional[FamilyTag]:
    """Family of the configurations allowed for e-adjoint lc germs on (lo, hi)."""
    m = _main_lc_matches(g, as_rational(lo), as_rational(hi))
    return m[0] if m else None


def _main_can_matches(g: DecoratedGraph) -> list[FamilyTag]:
    T = "MAIN_CAN"
    out = []
    if len(g) == 0:
        return out
    fc = _fchain_family(g)
    if fc is not None:
        out.append(_tag(T, fc.family, fc.parameters))
    bt = _badtail_family(g)
    if bt is not None:
        fam, kind, center, xi = bt
        if kind == "a" and all(x.self_int == -2 for x in g.curves):
            out.append(_tag(T, fam, (xi,) if fam == "4" else (), ("not terminal",)))
    sc = _star_chain(g)
    if sc is not None and g.curve(sc[0]).self_int == -1:
        center, left, right = sc
        out.append(_tag(T, "5", tuple(_chain_det(g, s) if s else 1 for s in (left, right))))
    return out


def classify_main_canonical(g: DecoratedGraph, lo=0, hi=Fraction(1, 4)) -> Optional[FamilyTag]:
    """Family among the configurations allowed for e-adjoint canonical germs."""
    m = _main_can_matches(g)
    return m[0] if m else None


def _surface_matches(g: DecoratedGraph) -> list[FamilyTag]:
    T = "SURF_LC"
    out = []
    if len(g) == 0:
        return out
    c = _irreducible(g)
    if c is not None:
        if c.nodal:
            out.append(_tag(T, "nodal", (), ("not klt",)))
        elif c.genus == 1:
            out.append(_tag(T, "elliptic", (), ("not klt",)))
    if not all(x.smooth_rational and x.self_int <= -2 for x in g.curves):
        return out
    order = is_chain_graph(g)
    if order is not None:
        out.append(_tag(T, "HJ", (_chain_det(g, order),)))
    if cycle_order(g):
        out.append(_tag(T, "cycle", (len(g),), ("not klt",)))
    branch = [x.id for x in g.curves if len(g.neighbors(x.id)) >= 3]
    simple_tree = all(m == 1 for _, _, m in g.edges) and len(g.edges) == len(g) - 1
    if simple_tree and len(branch) == 1:
        legs = star_legs(g, branch[0])
        if legs is not None:
            types = tuple(sorted(_chain_det(g, leg) for leg in legs))
            cls = _star_type_class(types)
            if cls is not None:
                notes = ("not klt",) if cls in "bc" else ()
                name = "2,2,n" if types[:2] == (2, 2) and len(types) == 3 else ",".join(map(str, types))
                out.append(_tag(T, f"fork({name})", (cls,) + types, notes))
    if simple_tree and len(branch) == 2 and _double_fork(g, branch):
        out.append(_tag(T, "double-fork", (len(g),), ("not klt",)))
    return out


def _double_fork(g, branch) -> bool:
    for b in branch:
        nb = g.neighbors(b)
        if len(nb) != 3:
            return False
        tips = [w for w in nb if len(g.neighbors(w)) == 1 and g.curve(w).self_int == -2]
        if len(tips) < 2:
            return False
    return True


def classify_surface_lc(g: DecoratedGraph) -> Optional[FamilyTag]:
    """Family among the lc surface configurations; foliation data is ignored."""
    m = _surface_matches(g)
    return m[0] if m else None


def _fol_matches(g: DecoratedGraph) -> list[FamilyTag]:
    T = "FOL_LC"
    out = []
    if len(g) == 0:
        return out
    fc = _fchain_family(g)
    if fc is not None:
        notes = ("terminal",) if fc.family == "1" else ("canonical",)
        out.append(_tag(T, fc.family, fc.parameters, notes))
    bt = _badtail_family(g)
    if bt is not None:
        fam, kind, center, xi = bt
        if kind == "a" and g.curve(center).self_int <= -2:
            out.append(_tag(T, fam, (xi,) if fam == "4" else (), ("canonical",)))
    if _egl(g):
        out.append(_tag(T, "5", (len(g),), ("canonical",)))
    sc = _star_chain(g, rational=False)
    if sc is not None:
        center, left, right = sc
        out.append(_tag(T, "6", tuple(_chain_det(g, s) if s else 1 for s in (left, right))))
    st = _f_star_graph(g, rational=False)
    if st is not None:
        out.append(_tag(T, "7", st[1]))
    return out


def classify_foliated_lc(g: DecoratedGraph) -> Optional[FamilyTag]:
    m = _fol_matches(g)
    return m[0] if m else None


def all_matches(g: DecoratedGraph, theorem: str, lo=0, hi=Fraction(1, 5)) -> list[FamilyTag]:
    """Every family of ``theorem`` the graph fits; at most one is expected."""
    theorem = theorem.upper().replace("-", "_")
    if theorem == "MAIN_LC":
        return _main_lc_matches(g, as_rational(lo), as_rational(hi))
    if theorem == "MAIN_CAN":
        return _main_can_matches(g)
    if theorem == "SURF_LC":
        return _surface_matches(g)
    if theorem == "FOL_LC":
        return _fol_matches(g)
    raise ValueError(f"unknown theorem {theorem!r}")


def classify(g: DecoratedGraph, theorem: str, lo=0, hi=Fraction(1, 5)) -> Optional[FamilyTag]:
    m = all_matches(g, theorem, lo, hi)
    return m[0] if m else None
