"""Decorated dual graphs of exceptional curve configurations.

A vertex is a :class:`Curve` carrying its self-intersection and the foliation
decorations (invariance, Z-index or tangency order, genus, nodal flag).
Edges carry intersection multiplicities.  A node of a nodal curve is a vertex
flag, never a loop.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional

from .exactnum import EpsAffine, format_rational
from .linalg import bareiss_det, is_symmetric, leading_minors

__all__ = [
    "Curve",
    "DecoratedGraph",
    "Divisor",
    "Violation",
    "GraphError",
    "ALL_FILTERS",
    "intersection_matrix",
    "is_negative_definite",
    "degrees",
    "validate",
    "canonical_key",
    "make_graph",
    "chain_graph",
    "det_neg",
]

ALL_FILTERS = frozenset({"ND", "R1", "R2", "R3", "MIN"})


class GraphError(ValueError):
    pass


@dataclass(frozen=True)
class Curve:
    id: str
    self_int: int
    invariant: bool = True
    z: Optional[int] = None
    tang: Optional[int] = None
    genus: int = 0
    nodal: bool = False

    def __post_init__(self):
        if not isinstance(self.id, str) or not self.id:
            raise GraphError("curve id must be a non-empty string")
        if self.self_int > -1:
            raise GraphError(f"{self.id}: self-intersection must be <= -1")
        if self.genus < 0:
            raise GraphError(f"{self.id}: negative genus")
        if self.invariant:
            if self.z is None or self.tang is not None:
                raise GraphError(f"{self.id}: invariant curves carry z and no tang")
            if self.z < 0:
                raise GraphError(f"{self.id}: negative z")
        else:
            if self.tang is None or self.z is not None:
                raise GraphError(f"{self.id}: non-invariant curves carry tang and no z")
            if self.tang < 0:
                raise GraphError(f"{self.id}: negative tang")
        if self.nodal and (not self.invariant or self.genus != 0):
            raise GraphError(f"{self.id}: nodal curves are invariant of geometric genus 0")

    @property
    def p_a(self) -> int:
        return self.genus + (1 if self.nodal else 0)

    @property
    def iota(self) -> int:
        return 0 if self.invariant else 1

    @property
    def smooth_rational(self) -> bool:
        return self.genus == 0 and not self.nodal

    def decoration(self) -> tuple:
        """Label-free vertex data, used for canonical forms."""
        return (
            0 if self.invariant else 1,
            -self.self_int,
            self.genus,
            1 if self.nodal else 0,
            self.z if self.invariant else self.tang,
        )

    def to_json(self) -> dict:
        d = {"id": self.id, "self": self.self_int, "genus": self.genus, "nodal": self.nodal,
             "invariant": self.invariant}
        if self.invariant:
            d["z"] = self.z
        else:
            d["tang"] = self.tang
        return d

    @classmethod
    def from_json(cls, d: Mapping) -> "Curve":
        inv = bool(d.get("invariant", True))
        return cls(
            id=str(d["id"]),
            self_int=int(d["self"]),
            invariant=inv,
            z=int(d["z"]) if inv else None,
            tang=None if inv else int(d.get("tang", 0)),
            genus=int(d.get("genus", 0)),
            nodal=bool(d.get("nodal", False)),
        )


@dataclass(frozen=True)
class DecoratedGraph:
    curves: tuple
    edges: tuple = ()
    _index: dict = field(default=None, init=False, repr=False, compare=False, hash=False)
    _adj: dict = field(default=None, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        curves = tuple(self.curves)
        object.__setattr__(self, "curves", curves)
        index = {}
        for i, c in enumerate(curves):
            if c.id in index:
                raise GraphError(f"duplicate curve id {c.id}")
            index[c.id] = i
        merged: dict = {}
        order = []
        for e in self.edges:
            a, b, m = (e[0], e[1], e[2]) if len(e) == 3 else (e[0], e[1], 1)
            m = int(m)
            if a not in index or b not in index:
                raise GraphError(f"edge {a}-{b} refers to an unknown curve")
            if a == b:
                raise GraphError("self-edges are not allowed; use the nodal flag")
            if m < 1:
                raise GraphError("edge multiplicity must be >= 1")
            key = (a, b) if index[a] < index[b] else (b, a)
            if key not in merged:
                order.append(key)
                merged[key] = 0
            merged[key] += m
        edges = tuple((a, b, merged[(a, b)]) for a, b in order)
        object.__setattr__(self, "edges", edges)
        adj = {c.id: {} for c in curves}
        for a, b, m in edges:
            adj[a][b] = m
            adj[b][a] = m
        object.__setattr__(self, "_index", index)
        object.__setattr__(self, "_adj", adj)

    # basic access
    @property
    def ids(self) -> list[str]:
        return [c.id for c in self.curves]

    def __len__(self):
        return len(self.curves)

    def __contains__(self, cid):
        return cid in self._index

    def curve(self, cid: str) -> Curve:
        try:
            return self.curves[self._index[cid]]
        except KeyError:
            raise GraphError(f"unknown curve id {cid!r}") from None

    def index(self, cid: str) -> int:
        try:
            return self._index[cid]
        except KeyError:
            raise GraphError(f"unknown curve id {cid!r}") from None

    def neighbors(self, cid: str) -> dict:
        self.index(cid)
        return dict(self._adj[cid])

    def mult(self, a: str, b: str) -> int:
        return self._adj[a].get(b, 0)

    def is_connected(self) -> bool:
        if not self.curves:
            return True
        seen = {self.curves[0].id}
        stack = [self.curves[0].id]
        while stack:
            v = stack.pop()
            for w in self._adj[v]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == len(self.curves)

    def components(self, ids: Iterable[str]) -> list[list[str]]:
        """Connected components of the induced subgraph on ``ids``."""
        wanted = set(ids)
        pool = [i for i in self.ids if i in wanted]
        left = set(pool)
        comps = []
        for start in pool:
            if start not in left:
                continue
            comp = []
            stack = [start]
            left.discard(start)
            while stack:
                v = stack.pop()
                comp.append(v)
                for w in self._adj[v]:
                    if w in left:
                        left.discard(w)
                        stack.append(w)
            comps.append(sorted(comp, key=self.index))
        return comps

    def subgraph(self, ids: Iterable[str]) -> "DecoratedGraph":
        keep = set(ids)
        return DecoratedGraph(
            tuple(c for c in self.curves if c.id in keep),
            tuple(e for e in self.edges if e[0] in keep and e[1] in keep),
        )

    def relabel(self, perm: list[int]) -> "DecoratedGraph":
        """Reorder curves: position k of the result holds curve ``perm[k]``."""
        return DecoratedGraph(tuple(self.curves[i] for i in perm), self.edges)

    def replace(self, cid: str, **changes) -> "DecoratedGraph":
        c = self.curve(cid)
        fields = dict(id=c.id, self_int=c.self_int, invariant=c.invariant, z=c.z, tang=c.tang,
                      genus=c.genus, nodal=c.nodal)
        fields.update(changes)
        new = Curve(**fields)
        return DecoratedGraph(tuple(new if x.id == cid else x for x in self.curves), self.edges)

    # serialization
    def to_json(self) -> dict:
        return {"curves": [c.to_json() for c in self.curves],
                "edges": [[a, b, m] for a, b, m in self.edges]}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), separators=(", ", ": "))

    @classmethod
    def from_json(cls, d: Mapping) -> "DecoratedGraph":
        curves = tuple(Curve.from_json(c) for c in d.get("curves", []))
        edges = tuple(tuple(e) for e in d.get("edges", []))
        return cls(curves, edges)

    @classmethod
    def loads(cls, text: str) -> "DecoratedGraph":
        return cls.from_json(json.loads(text))

    def to_dot(self, name: str = "E") -> str:
        lines = [f"graph {name} {{", "  node [shape=record];"]
        for c in self.curves:
            tag = f"Z={c.z}" if c.invariant else f"tang={c.tang}"
            extra = ""
            if c.genus:
                extra += f" | g={c.genus}"
            if c.nodal:
                extra += " | nodal"
            style = "solid" if c.invariant else "dashed"
            lines.append(f'  "{c.id}" [label="{c.id} | {c.self_int} | {tag}{extra}", style={style}];')
        for a, b, m in self.edges:
            attr = f' [label="{m}"]' if m > 1 else ""
            lines.append(f'  "{a}" -- "{b}"{attr};')
        lines.append("}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class Divisor:
    """Coefficients indexed by curve id, kept in the order of the graph."""

    coeffs: tuple  # of (id, EpsAffine)

    @classmethod
    def from_map(cls, m: Mapping, order: Optional[Iterable[str]] = None) -> "Divisor":
        keys = list(order) if order is not None else list(m)
        return cls(tuple((k, EpsAffine.lift(m[k])) for k in keys if k in m))

    def __getitem__(self, cid):
        for k, v in self.coeffs:
            if k == cid:
                return v
        raise KeyError(cid)

    def keys(self):
        return [k for k, _ in self.coeffs]

    def values(self):
        return [v for _, v in self.coeffs]

    def items(self):
        return list(self.coeffs)

    def __len__(self):
        return len(self.coeffs)

    def at(self, e) -> dict:
        return {k: v.at(e) for k, v in self.coeffs}

    def to_json(self) -> dict:
        return {k: v.to_json() for k, v in self.coeffs}

    def to_json_at(self, e) -> dict:
        return {k: format_rational(v.at(e)) for k, v in self.coeffs}


def intersection_matrix(g: DecoratedGraph) -> list[list[int]]:
    n = len(g)
    m = [[0] * n for _ in range(n)]
    for i, c in enumerate(g.curves):
        m[i][i] = c.self_int
    for a, b, k in g.edges:
        i, j = g.index(a), g.index(b)
        m[i][j] += k
        m[j][i] += k
    return m


def is_negative_definite(m) -> bool:
    if not is_symmetric(m):
        raise ValueError("intersection matrix must be symmetric")
    for k, d in enumerate(leading_minors(m), start=1):
        if (-1) ** k * d <= 0:
            return False
    return True


def degrees(g: DecoratedGraph, cid: str) -> tuple[int, int, int]:
    """(d, d1, d2): edge multiplicities to all, non-invariant and invariant neighbours."""
    d1 = d2 = 0
    for other, m in g.neighbors(cid).items():
        if g.curve(other).invariant:
            d2 += m
        else:
            d1 += m
    return d1 + d2, d1, d2


@dataclass(frozen=True)
class Violation:
    code: str
    curves: tuple
    message: str

    def to_json(self):
        return {"code": self.code, "curves": list(self.curves), "message": self.message}


def _is_tree(g: DecoratedGraph, ids: list[str]) -> bool:
    s = set(ids)
    simple = True
    count = 0
    for a, b, m in g.edges:
        if a in s and b in s:
            count += m
            simple = simple and m == 1
    return simple and count == len(ids) - 1


def validate(g: DecoratedGraph, filters: Iterable[str] = ALL_FILTERS) -> list[Violation]:
    """Realizability and minimality checks; violations are returned, never raised."""
    filters = set(filters)
    unknown = filters - ALL_FILTERS
    if unknown:
        raise ValueError(f"unknown filters {sorted(unknown)}")
    out: list[Violation] = []
    if not g.is_connected():
        out.append(Violation("CONN", tuple(g.ids), "graph is not connected"))
    if "ND" in filters and g.curves and not is_negative_definite(intersection_matrix(g)):
        out.append(Violation("ND", tuple(g.ids), "intersection matrix is not negative definite"))
    for c in g.curves:
        if not c.invariant:
            continue
        # A smooth invariant curve without singular points has C^2 = 0 by the
        # Camacho-Sad formula, so any smooth invariant curve with C^2 < 0 needs z >= 1.
        if "R1" in filters and not c.nodal and c.z < 1:
            out.append(Violation("R1", (c.id,), f"{c.id}: smooth invariant curve with z = 0"))
        if "R2" in filters:
            _, _, d2 = degrees(g, c.id)
            if c.z < d2:
                out.append(Violation("R2", (c.id,), f"{c.id}: z = {c.z} < d2 = {d2}"))
        if "MIN" in filters and c.self_int > -2:
            out.append(Violation("MIN", (c.id,), f"{c.id}: invariant curve with self-intersection {c.self_int}"))
    if "R3" in filters:
        inv = [c.id for c in g.curves if c.invariant]
        for comp in g.components(inv):
            if any(g.curve(x).nodal for x in comp) or not _is_tree(g, comp):
                continue
            total = sum(g.curve(x).z for x in comp)
            need = 2 * (len(comp) - 1) + 1
            if total < need:
                out.append(Violation("R3", tuple(comp),
                                     f"invariant tree {comp}: sum z = {total} < {need}, no room for a separatrix"))
    return out


def _vertex_invariant(g: DecoratedGraph, i: int) -> tuple:
    c = g.curves[i]
    nbrs = sorted((g.curves[g.index(o)].decoration(), m) for o, m in g.neighbors(c.id).items())
    return (c.decoration(), tuple(nbrs))


def canonical_key(g: DecoratedGraph) -> str:
    """Label-free canonical string.

    Vertices are sorted by a label-free invariant; the lexicographically
    smallest encoding over all orderings compatible with that sort is chosen,
    so isomorphic decorated graphs share a key.
    """
    n = len(g)
    if n == 0:
        return "[]"
    inv = [_vertex_invariant(g, i) for i in range(n)]
    classes: dict = {}
    for i in range(n):
        classes.setdefault(inv[i], []).append(i)
    blocks = [classes[k] for k in sorted(classes)]
    m = intersection_matrix(g)
    best = None
    for choice in itertools.product(*(itertools.permutations(b) for b in blocks)):
        perm = [i for block in choice for i in block]
        code = (tuple(g.curves[i].decoration() for i in perm),
                tuple(m[perm[a]][perm[b]] for a in range(n) for b in range(a + 1, n)))
        if best is None or code < best:
            best = code
    return json.dumps([list(map(list, best[0])), list(best[1])], separators=(",", ":"))


def make_graph(rows: Iterable[tuple], edges: Iterable[tuple] = ()) -> DecoratedGraph:
    """Shorthand constructor used by tests and examples.

    Each entry of ``rows`` is ``(id, self, "Z", k)`` for an invariant curve or
    ``(id, self, "T", k)`` for a non-invariant one, optionally followed by
    keyword dicts ``{"genus": g, "nodal": True}``.
    """
    curves = []
    for item in rows:
        cid, s, kind, k = item[:4]
        extra = item[4] if len(item) > 4 else {}
        if kind == "Z":
            curves.append(Curve(cid, s, True, z=k, **extra))
        elif kind == "T":
            curves.append(Curve(cid, s, False, tang=k, **extra))
        else:
            raise GraphError(f"unknown kind {kind!r}")
    return DecoratedGraph(tuple(curves), tuple(edges))


def chain_graph(selfs: list[int], zs: Optional[list] = None, prefix: str = "C") -> DecoratedGraph:
    """Chain C1 - C2 - ... with given self-intersections.

    ``zs`` entries are ints (invariant, Z-index) or ``("T", k)`` for a
    non-invariant curve with tangency k.  Default: invariant with z = 2.
    """
    zs = zs if zs is not None else [2] * len(selfs)
    rows = []
    for i, (s, z) in enumerate(zip(selfs, zs), start=1):
        if isinstance(z, tuple):
            rows.append((f"{prefix}{i}", s, "T", z[1]))
        else:
            rows.append((f"{prefix}{i}", s, "Z", z))
    edges = [(f"{prefix}{i}", f"{prefix}{i + 1}", 1) for i in range(1, len(selfs))]
    return make_graph(rows, edges)


def det_neg(m) -> int:
    """det(-m), the usual positive determinant attached to a negative definite block."""
    return bareiss_det([[-x for x in row] for row in m])
