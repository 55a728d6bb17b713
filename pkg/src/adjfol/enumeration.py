"""Bounded enumeration of decorated graphs and the classification sweeps.

Generation is split in two layers.  Unlabeled connected multigraphs
("topologies") are produced once per size and put in a canonical labeling;
decorations are then attached and only the lexicographically smallest
decoration in each orbit of the topology's automorphism group is kept.  The
pair (canonical topology, minimal decoration) is therefore a canonical form
for the decorated graph.

Discrepancies are computed in bulk: for a fixed topology and self-intersection
vector the inverse intersection matrix is cached as an integer matrix ``P``
with ``M^{-1} = P / L``, and all decorations are graded at once with integer
numpy arrays (no floating point).  Candidate graphs are then materialized as
:class:`DecoratedGraph` objects for the structural classifiers.
"""
from __future__ import annotations

import itertools
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import lcm
from typing import Iterator, Optional

import numpy as np

from .adjoint import Convention, discrepancies, grade, point_grade
from .exactnum import as_rational
from .graph import Curve, DecoratedGraph, is_negative_definite, validate
from .linalg import solve_rational
from .patterns import all_matches

__all__ = [
    "Bounds",
    "SweepReport",
    "Topology",
    "topologies",
    "generate",
    "generate_keyed",
    "iter_batches",
    "batch_grades",
    "iter_family_instances",
    "verify_theorem",
    "cross_check_prop15",
    "lc_somewhere",
]


@dataclass(frozen=True)
class Bounds:
    max_curves: int = 4
    min_self: int = -4
    max_z: int = 4
    max_tang: int = 1
    allow_nodal: bool = True
    allow_genus1: bool = True
    max_edge_mult: int = 2
    surface: bool = False  # undecorated curves for the classical surface sweep

    def __post_init__(self):
        if self.max_curves < 0 or self.min_self > -1 or self.max_z < 0 or self.max_tang < 0:
            raise ValueError("bounds out of range")
        if not 1 <= self.max_edge_mult <= 2:
            raise ValueError("edge multiplicity bound must be 1 or 2")

    def to_json(self) -> dict:
        return dict(self.__dict__)


# topologies


@dataclass(frozen=True)
class Topology:
    n: int
    adj: tuple  # n x n, zero diagonal
    auts: tuple  # automorphisms as tuples
    key: str

    @property
    def edges(self):
        return [(i, j, self.adj[i][j]) for i in range(self.n) for j in range(i + 1, self.n) if self.adj[i][j]]


def _connected(adj, n) -> bool:
    seen = {0}
    stack = [0]
    while stack:
        v = stack.pop()
        for w in range(n):
            if adj[v][w] and w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == n


def _class_perms(adj, n):
    """Vertex orders compatible with a degree-based refinement."""
    inv = [tuple(sorted(adj[v])) for v in range(n)]
    inv = [(inv[v], tuple(sorted((adj[v][w], inv[w]) for w in range(n) if adj[v][w]))) for v in range(n)]
    classes = {}
    for v in range(n):
        classes.setdefault(inv[v], []).append(v)
    groups = [classes[k] for k in sorted(classes)]
    for parts in itertools.product(*(itertools.permutations(gp) for gp in groups)):
        yield tuple(v for part in parts for v in part)


def _canon_adj(adj, n):
    best = None
    for perm in _class_perms(adj, n):
        code = tuple(adj[perm[a]][perm[b]] for a in range(n) for b in range(a + 1, n))
        if best is None or code > best:
            best = code
            best_perm = perm
    return best, best_perm


@lru_cache(maxsize=None)
def topologies(n: int, max_mult: int = 2, min_self: int = -4) -> tuple:
    """Connected multigraphs on n vertices that admit a negative definite
    intersection matrix with self-intersections >= min_self."""
    if n <= 0:
        return ()
    pairs = list(itertools.combinations(range(n), 2))
    seen = {}
    for mults in itertools.product(range(max_mult + 1), repeat=len(pairs)):
        adj = [[0] * n for _ in range(n)]
        for (i, j), m in zip(pairs, mults):
            adj[i][j] = adj[j][i] = m
        if not _connected(adj, n):
            continue
        code, perm = _canon_adj(adj, n)
        if code in seen:
            continue
        # negative definiteness only gets easier as the diagonal decreases
        m = [[adj[i][j] if i != j else min_self for j in range(n)] for i in range(n)]
        if not is_negative_definite(m):
            seen[code] = None
            continue
        cadj = tuple(tuple(adj[perm[a]][perm[b]] for b in range(n)) for a in range(n))
        auts = tuple(p for p in itertools.permutations(range(n))
                     if all(cadj[p[a]][p[b]] == cadj[a][b] for a in range(n) for b in range(n)))
        seen[code] = Topology(n, cadj, auts, "".join(map(str, code)))
    out = [t for t in seen.values() if t is not None]
    out.sort(key=lambda t: t.key, reverse=True)
    return tuple(out)


# batches of decorated graphs


def _orbit_min_mask(codes: np.ndarray, auts) -> np.ndarray:
    keep = np.ones(len(codes), dtype=bool)
    ident = tuple(range(codes.shape[1]))
    for p in auts:
        if p == ident:
            continue
        diff = codes[:, list(p)] - codes
        nz = diff != 0
        has = nz.any(axis=1)
        first = nz.argmax(axis=1)
        val = diff[np.arange(len(codes)), first]
        keep &= ~has | (val > 0)
    return keep


@dataclass
class Batch:
    """All kept decorations sharing a topology, self vector and invariance pattern."""

    topo: Topology
    selfs: tuple
    iota: tuple  # 1 for non-invariant
    X: np.ndarray  # z or tang per vertex, one row per graph
    P: np.ndarray  # L * M^{-1}
    L: int
    kc: np.ndarray  # constant part of K.C for each row
    ke: np.ndarray  # eps part of K.C (decoration independent)
    surface: bool = False

    def __len__(self):
        return len(self.X)

    def log_parts(self):
        """L * a as (constant part per row, eps part)."""
        return self.kc @ self.P.T, self.P @ self.ke

    def graph(self, row: int) -> DecoratedGraph:
        n = self.topo.n
        curves = []
        for i in range(n):
            cid = f"E{i + 1}"
            if self.surface:
                curves.append(Curve(cid, self.selfs[i], True, z=0))
            elif self.iota[i]:
                curves.append(Curve(cid, self.selfs[i], False, tang=int(self.X[row, i])))
            else:
                curves.append(Curve(cid, self.selfs[i], True, z=int(self.X[row, i])))
        edges = [(f"E{i + 1}", f"E{j + 1}", m) for i, j, m in self.topo.edges]
        return DecoratedGraph(tuple(curves), tuple(edges))

    def key(self, row: int) -> str:
        dec = ",".join(
            f"{'T' if self.iota[i] else 'Z'}{-self.selfs[i]}:{'-' if self.surface else int(self.X[row, i])}"
            for i in range(self.topo.n))
        return f"{self.topo.n}|{self.topo.key}|{dec}"


def _positive_definite_det(m) -> Optional[int]:
    """det(m) if the symmetric integer matrix m is positive definite, else None.

    One fraction-free elimination pass without pivoting: its pivots are the
    leading principal minors.
    """
    a = [list(row) for row in m]
    n = len(a)
    prev = 1
    for k in range(n):
        if a[k][k] <= 0:
            return None
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return prev


@lru_cache(maxsize=None)
def _inverse(adj: tuple, selfs: tuple):
    """(P, L) with M^{-1} = P / L, or None if M is not negative definite."""
    n = len(selfs)
    neg = [[-adj[i][j] if i != j else -selfs[i] for j in range(n)] for i in range(n)]
    L = _positive_definite_det(neg)
    if L is None:
        return None
    m = -np.array(neg, dtype=np.int64)
    P = np.rint(np.linalg.inv(m.astype(float)) * L).astype(np.int64)
    if not np.array_equal(m @ P, L * np.eye(n, dtype=np.int64)):
        # rounding failed; fall back to the exact solver
        cols = solve_rational(m.tolist(), [[Fraction(int(i == j)) for i in range(n)] for j in range(n)])
        P = np.array([[int(cols[j][i] * L) for j in range(n)] for i in range(n)], dtype=np.int64)
    return P, L


def _cartesian(ranges) -> np.ndarray:
    if not ranges:
        return np.zeros((1, 0), dtype=np.int64)
    grids = np.meshgrid(*[np.arange(lo, hi + 1, dtype=np.int64) for lo, hi in ranges], indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


def _invariant_trees(topo: Topology, iota) -> list[list[int]]:
    """Invariant components that are trees with simple edges."""
    n = topo.n
    inv = [i for i in range(n) if not iota[i]]
    left = set(inv)
    out = []
    while left:
        start = left.pop()
        comp = [start]
        stack = [start]
        while stack:
            v = stack.pop()
            for w in range(n):
                if topo.adj[v][w] and w in left:
                    left.discard(w)
                    comp.append(w)
                    stack.append(w)
        edges = [topo.adj[a][b] for a, b in itertools.combinations(comp, 2) if topo.adj[a][b]]
        if all(m == 1 for m in edges) and len(edges) == len(comp) - 1:
            out.append(sorted(comp))
    return out


def _topology_batches(topo: Topology, b: Bounds) -> Iterator[Batch]:
    n = topo.n
    top = -2 if b.surface else -1
    for selfs in itertools.product(range(b.min_self, top + 1), repeat=n):
        inv = _inverse(topo.adj, selfs)
        if inv is None:
            continue
        P, L = inv
        deg = [sum(topo.adj[i]) for i in range(n)]
        ke = np.array([d - 2 for d in deg], dtype=np.int64)
        if b.surface:
            codes = np.array([[-s for s in selfs]], dtype=np.int64)
            if _orbit_min_mask(codes, topo.auts)[0]:
                yield Batch(topo, selfs, (0,) * n, np.zeros((1, n), dtype=np.int64), P, L,
                            np.zeros((1, n), dtype=np.int64), ke, surface=True)
            continue
        for iota in itertools.product((0, 1), repeat=n):
            if any(not iota[i] and selfs[i] > -2 for i in range(n)):
                continue  # MIN
            d1 = [sum(topo.adj[i][j] for j in range(n) if iota[j]) for i in range(n)]
            d2 = [deg[i] - d1[i] for i in range(n)]
            ranges = []
            for i in range(n):
                if iota[i]:
                    ranges.append((0, b.max_tang))
                else:
                    ranges.append((max(1, d2[i]), b.max_z))  # R1 and R2
            if any(lo > hi for lo, hi in ranges):
                continue
            X = _cartesian(ranges)
            for comp in _invariant_trees(topo, iota):  # R3
                need = 2 * (len(comp) - 1) + 1
                X = X[X[:, comp].sum(axis=1) >= need]
            if not len(X):
                continue
            width = max(b.max_z, b.max_tang) + 1
            codes = (np.array(iota, dtype=np.int64) * 64 + np.array([-s for s in selfs], dtype=np.int64)) * width + X
            X = X[_orbit_min_mask(codes, topo.auts)]
            if not len(X):
                continue
            base = np.array([d1[i] if iota[i] else d1[i] - 2 for i in range(n)], dtype=np.int64)
            kc = X + base
            yield Batch(topo, selfs, iota, X, P, L, kc, ke)


def _isolated_extras(b: Bounds) -> list[DecoratedGraph]:
    """Genus one and nodal curves, generated only as single vertices."""
    if b.max_curves < 1:
        return []
    out = []
    top = -1
    for s in range(b.min_self, top + 1):
        if b.allow_nodal and (s <= -2 or b.surface):
            for z in range(0, b.max_z + 1):
                out.append(Curve("E1", s, True, z=z, nodal=True))
        if b.allow_genus1:
            if b.surface:
                out.append(Curve("E1", s, True, z=0, genus=1))
                continue
            if s <= -2:
                for z in range(1, b.max_z + 1):
                    out.append(Curve("E1", s, True, z=z, genus=1))
            for t in range(0, b.max_tang + 1):
                out.append(Curve("E1", s, False, tang=t, genus=1))
    if b.surface:
        out = [c for c in out if c.z == 0]
    gs = [DecoratedGraph((c,), ()) for c in out]
    filters = {"ND"} if b.surface else {"ND", "R1", "R2", "R3", "MIN"}
    return [g for g in gs if not validate(g, filters)]


def _extra_key(g: DecoratedGraph) -> str:
    c = g.curves[0]
    kind = "N" if c.nodal else "G"
    tag = f"Z{-c.self_int}:{c.z}" if c.invariant else f"T{-c.self_int}:{c.tang}"
    return f"1|{kind}|{tag}"


def _all_topologies(b: Bounds):
    out = []
    for n in range(1, b.max_curves + 1):
        out.extend(topologies(n, b.max_edge_mult, b.min_self))
    return out


def iter_batches(b: Bounds, topos=None) -> Iterator[Batch]:
    for t in topos if topos is not None else _all_topologies(b):
        yield from _topology_batches(t, b)


def generate(b: Bounds) -> Iterator[DecoratedGraph]:
    """Every decorated graph within bounds once per isomorphism class.

    Only graphs passing negative definiteness and the realizability filters
    are produced.  Order is deterministic (by canonical key).
    """
    items = []
    for batch in iter_batches(b):
        for r in range(len(batch)):
            items.append((batch.key(r), batch, r))
    for g in _isolated_extras(b):
        items.append((_extra_key(g), g, None))
    items.sort(key=lambda t: t[0])
    for key, obj, r in items:
        yield obj if r is None else obj.graph(r)


def generate_keyed(b: Bounds) -> list[tuple[str, DecoratedGraph]]:
    out = [(batch.key(r), batch.graph(r)) for batch in iter_batches(b) for r in range(len(batch))]
    out += [(_extra_key(g), g) for g in _isolated_extras(b)]
    out.sort(key=lambda t: t[0])
    return out


# counting before filters (Burnside over each topology's automorphism group)


def _cycles(p) -> list[list[int]]:
    seen = set()
    out = []
    for i in range(len(p)):
        if i in seen:
            continue
        cyc = []
        j = i
        while j not in seen:
            seen.add(j)
            cyc.append(j)
            j = p[j]
        out.append(cyc)
    return out


def _raw_counts(b: Bounds) -> tuple[int, int]:
    """(all decorated classes in the box, those with a negative definite matrix)."""
    selfs = list(range(b.min_self, (-2 if b.surface else -1) + 1))
    per_vertex = 1 if b.surface else (b.max_z + 1) + (b.max_tang + 1)
    total = 0
    nd = 0
    for t in _all_topologies(b):
        cyc = {p: _cycles(p) for p in t.auts}
        tot = sum((len(selfs) * per_vertex) ** len(c) for c in cyc.values())
        total += tot // len(t.auts)
        fix = 0
        for s in itertools.product(selfs, repeat=t.n):
            if _inverse(t.adj, s) is None:
                continue
            for p, cs in cyc.items():
                if all(s[i] == s[p[i]] for i in range(t.n)):
                    fix += per_vertex ** len(cs)
        nd += fix // len(t.auts)
    extras = len(_isolated_extras(Bounds(**{**b.__dict__, "max_curves": 1})))
    return total + extras, nd + extras


# grading helpers


def _interval_masks(const: np.ndarray, eps: np.ndarray, lo: Fraction, hi: Fraction):
    """(nonneg on open (lo,hi), positive on open (lo,hi)) per row, for L-scaled parts."""
    def at(e):
        return const * e.denominator + eps * e.numerator

    vlo, vhi = at(lo), at(hi)
    nonneg = (vlo >= 0) & (vhi >= 0)
    zero = (const == 0) & (eps == 0)
    return nonneg.all(axis=1), (nonneg & ~zero).all(axis=1)


def _point_masks(const, eps, e: Fraction):
    v = const * e.denominator + eps * e.numerator
    return (v >= 0).all(axis=1), (v > 0).all(axis=1)


def _exists_mask(const: np.ndarray, eps: np.ndarray, lo: Fraction, hi: Fraction, strict: bool) -> np.ndarray:
    """Rows for which some e in the open interval (lo, hi) makes every
    const + eps*e nonnegative (strict: positive).  Exact integer comparisons."""
    up = eps > 0
    down = eps < 0
    flat = eps == 0
    ok = ((const > 0) if strict else (const >= 0))[...] | ~flat
    ok = ok.all(axis=1)
    # each rising constraint needs its root below hi, each falling one above lo
    ok &= (~up | (-const * hi.denominator < hi.numerator * eps)).all(axis=1)
    ok &= (~down | (-const * lo.denominator < lo.numerator * eps)).all(axis=1)
    # every rising root must lie below every falling root
    ci, ei = const[:, :, None], eps[:, :, None]
    cj, ej = const[:, None, :], eps[:, None, :]
    pair = up[:, :, None] & down[:, None, :]
    cmp = cj * ei - ci * ej
    good = (cmp > 0) if strict else (cmp >= 0)
    ok &= (~pair | good).all(axis=(1, 2))
    return ok


def batch_grades(batch: Batch, convention: Convention, lo=None, hi=None, pointwise: bool = False) -> dict:
    """Vectorized grades for every row of a batch."""
    L = batch.L
    ac, ae = batch.log_parts()
    n = batch.topo.n
    ae = np.broadcast_to(ae, ac.shape)
    iota = np.array(batch.iota, dtype=np.int64)
    if convention is Convention.SURFACE:
        # K = K_X + E: the eps part alone
        a = np.broadcast_to(batch.P @ batch.ke, (len(batch), n))
        lc, klt = (a >= 0).all(axis=1), (a > 0).all(axis=1)
        canonical, terminal = (a >= L).all(axis=1), (a > L).all(axis=1)
    elif convention is Convention.FOLIATED:
        lc, klt = (ac >= 0).all(axis=1), (ac > 0).all(axis=1)
        b = ac - L * iota
        canonical, terminal = (b >= 0).all(axis=1), (b > 0).all(axis=1)
    else:
        lo, hi = as_rational(lo), as_rational(hi)
        if pointwise:
            ae = np.ascontiguousarray(ae)
            bc, be = ac - L * iota, ae - L
            lc, klt = _exists_mask(ac, ae, lo, hi, False), _exists_mask(ac, ae, lo, hi, True)
            canonical, terminal = _exists_mask(bc, be, lo, hi, False), _exists_mask(bc, be, lo, hi, True)
        else:
            lc, klt = _interval_masks(ac, ae, lo, hi)
            canonical, terminal = _interval_masks(ac - L * iota, ae - L, lo, hi)
    return {"lc": lc, "klt": klt, "canonical": canonical, "terminal": terminal}


def lc_somewhere(parts, lo, hi, strict: bool = False) -> bool:
    """Whether some e in the open interval (lo, hi) makes every c + e*eps >= 0
    (> 0 when ``strict``).  ``parts`` is a list of (c, eps) pairs.

    The feasible set is the interval between the largest root of a rising
    constraint and the smallest root of a falling one.
    """
    lo, hi = as_rational(lo), as_rational(hi)
    rising, falling = [], []
    for c, e in parts:
        c, e = Fraction(c), Fraction(e)
        if e == 0:
            if c < 0 or (strict and c == 0):
                return False
        elif e > 0:
            rising.append(-c / e)
        else:
            falling.append(-c / e)
    a = max(rising, default=None)
    b = min(falling, default=None)
    if a is not None and a >= hi:
        return False
    if b is not None and b <= lo:
        return False
    if a is not None and b is not None:
        return a < b if strict else a <= b
    return True


# sweeps


@dataclass
class SweepReport:
    theorem: str
    interval: tuple
    bounds: dict
    total_generated: int = 0
    nd_count: int = 0
    filter_pass: int = 0
    lc_set: list = field(default_factory=list)
    matched: dict = field(default_factory=dict)
    unmatched_lc: list = field(default_factory=list)
    family_instances_failing_lc: list = field(default_factory=list)
    family_instances: dict = field(default_factory=dict)
    annotation_violations: list = field(default_factory=list)
    ambiguous: list = field(default_factory=list)
    elapsed: float = 0.0

    @property
    def ok(self) -> bool:
        return not (self.unmatched_lc or self.family_instances_failing_lc
                    or self.annotation_violations or self.ambiguous)

    def to_json(self, with_keys: bool = False) -> dict:
        d = {
            "theorem": self.theorem,
            "interval": [str(x) for x in self.interval] if self.interval else None,
            "bounds": self.bounds,
            "total_generated": self.total_generated,
            "nd_count": self.nd_count,
            "filter_pass": self.filter_pass,
            "lc_count": len(self.lc_set),
            "matched": dict(sorted(self.matched.items())),
            "family_instances": dict(sorted(self.family_instances.items())),
            "unmatched_lc": self.unmatched_lc,
            "family_instances_failing_lc": self.family_instances_failing_lc,
            "annotation_violations": self.annotation_violations,
            "ambiguous": self.ambiguous,
        }
        if with_keys:
            d["lc_set"] = self.lc_set
        return d


THEOREM_SETUP = {
    # grade used as the theorem's hypothesis, and the convention
    "MAIN_LC": ("lc", Convention.ADJOINT),
    "MAIN_CAN": ("canonical", Convention.ADJOINT),
    "SURF_LC": ("lc", Convention.SURFACE),
    "FOL_LC": ("lc", Convention.FOLIATED),
}


def _norm_theorem(t: str) -> str:
    t = t.upper().replace("-", "_")
    aliases = {"MAIN_CANONICAL": "MAIN_CAN", "SURFACE_LC": "SURF_LC", "FOLIATED_LC": "FOL_LC"}
    t = aliases.get(t, t)
    if t not in THEOREM_SETUP:
        raise ValueError(f"unknown theorem {t!r}")
    return t


def _candidate_mask(batch: Batch) -> np.ndarray:
    """Cheap necessary conditions shared by every family of the foliated theorems."""
    if batch.surface:
        # every surface family is a tree or a cycle
        t = batch.topo
        degs = [sum(row) for row in t.adj]
        edges = sum(m for _, _, m in t.edges)
        shaped = edges == t.n - 1 or (edges == t.n and all(d == 2 for d in degs))
        return np.full(len(batch), shaped, dtype=bool)
    iota = np.array(batch.iota, dtype=bool)
    if iota.sum() > 1:
        return np.zeros(len(batch), dtype=bool)
    X = batch.X
    n = batch.topo.n
    d2 = np.array([sum(batch.topo.adj[i][j] for j in range(n) if not batch.iota[j]) for i in range(n)])
    ok = np.ones(len(batch), dtype=bool)
    if iota.any():
        ok &= (X[:, iota] == 0).all(axis=1)
    inv = ~iota
    if inv.any():
        ok &= (X[:, inv] <= 3).all(axis=1) & ((X[:, inv] - d2[inv]) <= 2).all(axis=1)
    return ok


def iter_family_instances(b: Bounds, theorem: str, lo=0, hi=Fraction(1, 5)) -> Iterator[tuple]:
    """(key, graph, tag) for every generated graph matching a family of ``theorem``.

    Uses the same structural prefilter as the sweeps; graphs it rejects
    cannot match any family.
    """
    theorem = _norm_theorem(theorem)
    if theorem == "SURF_LC":
        b = Bounds(**{**b.__dict__, "surface": True})
    for batch in iter_batches(b):
        for r in np.nonzero(_candidate_mask(batch))[0]:
            g = batch.graph(int(r))
            for tag in all_matches(g, theorem, lo, hi):
                yield batch.key(int(r)), g, tag
    for g in _isolated_extras(b):
        for tag in all_matches(g, theorem, lo, hi):
            yield _extra_key(g), g, tag


def _check_annotations(theorem: str, tag, grades: dict) -> Optional[str]:
    notes = set(tag.annotations)
    if "not klt" in notes and grades["klt"]:
        return "graded klt"
    if "not terminal" in notes and grades["terminal"]:
        return "graded terminal"
    if "terminal" in notes and not grades["terminal"]:
        return "not terminal"
    if "canonical" in notes and not grades["canonical"]:
        return "not canonical"
    return None


def _sweep_part(args):
    b, theorem, lo, hi, topo_ids, pointwise = args
    target, conv = THEOREM_SETUP[theorem]
    all_topos = _all_topologies(b)
    topos = [all_topos[i] for i in topo_ids]
    out = {"filter_pass": 0, "lc": [], "matched": {}, "unmatched": [], "failing": [],
           "instances": {}, "annotation": [], "ambiguous": []}

    def handle(key, g, grades, in_target):
        matches = all_matches(g, theorem, lo if lo is not None else 0, hi if hi is not None else Fraction(1, 5))
        if len(matches) > 1:
            out["ambiguous"].append({"key": key, "families": [m.code for m in matches]})
        tag = matches[0] if matches else None
        if in_target:
            out["lc"].append(key)
            if tag is None:
                out["unmatched"].append({"key": key, "graph": g.to_json()})
            else:
                out["matched"][tag.code] = out["matched"].get(tag.code, 0) + 1
        if tag is not None:
            out["instances"][tag.code] = out["instances"].get(tag.code, 0) + 1
            if not in_target:
                out["failing"].append({"key": key, "family": tag.code, "graph": g.to_json()})
            elif (why := _check_annotations(theorem, tag, grades)) is not None:
                out["annotation"].append({"key": key, "family": tag.code, "problem": why})

    for batch in iter_batches(b, topos):
        out["filter_pass"] += len(batch)
        gr = batch_grades(batch, conv, lo, hi, pointwise)
        hit = gr[target]
        cand = _candidate_mask(batch) | hit
        for r in np.nonzero(cand)[0]:
            r = int(r)
            handle(batch.key(r), batch.graph(r), {k: bool(v[r]) for k, v in gr.items()}, bool(hit[r]))
    return out


def _scalar_grades(g, conv, lo, hi, pointwise=False) -> dict:
    if conv is Convention.ADJOINT and pointwise:
        d = discrepancies(g)
        logp = [(v.const, v.eps) for v in d.log.values()]
        rawp = [(v.const, v.eps) for v in d.raw.values()]
        return {"lc": lc_somewhere(logp, lo, hi), "klt": lc_somewhere(logp, lo, hi, strict=True),
                "canonical": lc_somewhere(rawp, lo, hi), "terminal": lc_somewhere(rawp, lo, hi, strict=True)}
    if conv is Convention.ADJOINT:
        v = grade(g, lo, hi, convention=conv)
    else:
        v = grade(g, convention=conv)
    return v.as_dict()


def verify_theorem(b: Bounds, theorem: str, lo=None, hi=None, jobs: int = 1,
                   pointwise: bool = False) -> SweepReport:
    """Completeness and soundness of a classification within bounds.

    Completeness: every generated graph satisfying the theorem's hypothesis
    (lc or canonical on the open interval) matches a family.  Soundness:
    every family instance satisfies the hypothesis, and the theorem's
    annotations (not klt, terminal, ...) agree with the grades.

    By default a grade must hold on the whole open interval.  With
    ``pointwise`` it only has to hold at some e in the interval, which is the
    fixed-e reading of the theorems and makes completeness a stronger check.
    """
    t0 = time.perf_counter()
    theorem = _norm_theorem(theorem)
    target, conv = THEOREM_SETUP[theorem]
    if conv is Convention.ADJOINT:
        if lo is None or hi is None:
            lo, hi = (Fraction(0), Fraction(1, 5)) if theorem == "MAIN_LC" else (Fraction(0), Fraction(1, 4))
        lo, hi = as_rational(lo), as_rational(hi)
        if lo >= hi:
            raise ValueError("empty interval")
    else:
        lo = hi = None
    if theorem == "SURF_LC" and not b.surface:
        b = Bounds(**{**b.__dict__, "surface": True})
    n_topos = len(_all_topologies(b))
    ids = list(range(n_topos))
    if jobs > 1 and n_topos > 1:
        chunks = [ids[k::jobs] for k in range(jobs)]
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            parts = list(ex.map(_sweep_part, [(b, theorem, lo, hi, c, pointwise) for c in chunks]))
    else:
        parts = [_sweep_part((b, theorem, lo, hi, ids, pointwise))]

    # isolated genus one / nodal curves go through the scalar path
    extra = {"filter_pass": 0, "lc": [], "matched": {}, "unmatched": [], "failing": [],
             "instances": {}, "annotation": [], "ambiguous": []}
    for g in _isolated_extras(b):
        key = _extra_key(g)
        gr = _scalar_grades(g, conv, lo, hi, pointwise)
        extra["filter_pass"] += 1
        matches = all_matches(g, theorem, lo or 0, hi or Fraction(1, 5))
        tag = matches[0] if matches else None
        if len(matches) > 1:
            extra["ambiguous"].append({"key": key, "families": [m.code for m in matches]})
        if gr[target]:
            extra["lc"].append(key)
            if tag is None:
                extra["unmatched"].append({"key": key, "graph": g.to_json()})
            else:
                extra["matched"][tag.code] = extra["matched"].get(tag.code, 0) + 1
        if tag is not None:
            extra["instances"][tag.code] = extra["instances"].get(tag.code, 0) + 1
            if not gr[target]:
                extra["failing"].append({"key": key, "family": tag.code, "graph": g.to_json()})
            elif (why := _check_annotations(theorem, tag, gr)) is not None:
                extra["annotation"].append({"key": key, "family": tag.code, "problem": why})
    parts.append(extra)

    rep = SweepReport(theorem, (lo, hi) if lo is not None else (), b.to_json())
    rep.total_generated, rep.nd_count = _raw_counts(b)
    for p in parts:
        rep.filter_pass += p["filter_pass"]
        rep.lc_set.extend(p["lc"])
        for k, v in p["matched"].items():
            rep.matched[k] = rep.matched.get(k, 0) + v
        for k, v in p["instances"].items():
            rep.family_instances[k] = rep.family_instances.get(k, 0) + v
        rep.unmatched_lc.extend(p["unmatched"])
        rep.family_instances_failing_lc.extend(p["failing"])
        rep.annotation_violations.extend(p["annotation"])
        rep.ambiguous.extend(p["ambiguous"])
    rep.lc_set.sort()
    for lst in (rep.unmatched_lc, rep.family_instances_failing_lc, rep.annotation_violations, rep.ambiguous):
        lst.sort(key=lambda d: d["key"])
    rep.elapsed = time.perf_counter() - t0
    return rep


def _prop15_part(args):
    b, topo_ids = args
    fifth, quarter = Fraction(1, 5), Fraction(1, 4)
    zero = Fraction(0)
    counts = dict.fromkeys(PROP15_COUNTS, 0)
    bad = []
    all_topos = _all_topologies(b)
    for batch in iter_batches(b, [all_topos[i] for i in topo_ids]):
        ac, ae = batch.log_parts()
        ae_full = np.broadcast_to(ae, ac.shape)
        L = batch.L
        iota = np.array(batch.iota, dtype=np.int64)
        lc, klt = _interval_masks(ac, ae_full, zero, fifth)
        can, _ = _interval_masks(ac - L * iota, ae_full - L, zero, quarter)
        fol_lc = (ac >= 0).all(axis=1)
        surf = batch.P @ batch.ke
        surf_lc, surf_klt = np.bool_((surf >= 0).all()), np.bool_((surf > 0).all())
        ae_c = np.ascontiguousarray(ae_full)
        bc, be = ac - L * iota, ae_c - L
        lc_some = _exists_mask(ac, ae_c, zero, fifth, False)
        can_some = _exists_mask(bc, be, zero, quarter, False)
        counts["graphs"] += len(batch)
        counts["lc_interval"] += int(lc.sum())
        counts["klt_interval"] += int(klt.sum())
        counts["canonical_interval"] += int(can.sum())
        counts["lc_somewhere"] += int(lc_some.sum())
        counts["canonical_somewhere"] += int(can_some.sum())
        checks = [
            (lc & ~(fol_lc & surf_lc), "lc(0,1/5) but not foliated-lc and surface-lc"),
            (klt & ~surf_klt, "klt(0,1/5) but not surface-klt"),
            (can & ~(fol_lc & surf_klt), "canonical(0,1/4) but not foliated-lc and surface-klt"),
            (lc_some & ~(fol_lc & surf_lc), "lc at some e < 1/5 but not foliated-lc and surface-lc"),
            (can_some & ~(fol_lc & surf_klt), "canonical at some e < 1/4 but not foliated-lc and surface-klt"),
        ]
        bad_rows = np.zeros(len(batch), dtype=bool)
        for mask, _ in checks:
            bad_rows |= mask
        for r in np.nonzero(bad_rows)[0]:
            r = int(r)
            problems = [msg for mask, msg in checks if mask[r]]
            bad.append({"key": batch.key(r), "graph": batch.graph(r).to_json(), "problems": problems})
    return counts, bad


PROP15_COUNTS = ("graphs", "lc_interval", "klt_interval", "canonical_interval",
                 "lc_somewhere", "canonical_somewhere")


def cross_check_prop15(b: Bounds, jobs: int = 1) -> dict:
    """Check the implications from e-adjoint grades to foliated and surface grades.

    (1) lc on (0,1/5) => foliated lc and surface lc;
    (1') lc and klt on (0,1/5) => surface klt;
    (2) canonical on (0,1/4) => foliated lc and surface klt.
    The pointwise forms (some e in the interval instead of all e) are checked
    as well; they are stronger.
    """
    t0 = time.perf_counter()
    fifth, quarter = Fraction(1, 5), Fraction(1, 4)
    zero = Fraction(0)
    ids = list(range(len(_all_topologies(b))))
    if jobs > 1 and len(ids) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            parts = list(ex.map(_prop15_part, [(b, ids[k::jobs]) for k in range(jobs)]))
    else:
        parts = [_prop15_part((b, ids))]
    counts = dict.fromkeys(PROP15_COUNTS, 0)
    bad = []
    for c, lst in parts:
        for k in counts:
            counts[k] += c[k]
        bad.extend(lst)
    for g in _isolated_extras(b):
        counts["graphs"] += 1
        d = discrepancies(g)
        lc = grade(g, zero, fifth, result=d)
        can = grade(g, zero, quarter, result=d)
        fol = grade(g, convention="foliated")
        surf = grade(g, convention="surface")
        problems = []
        if lc.lc and not (fol.lc and surf.lc):
            problems.append("lc(0,1/5) but not foliated-lc and surface-lc")
        if lc.klt and not surf.klt:
            problems.append("klt(0,1/5) but not surface-klt")
        if can.canonical and not (fol.lc and surf.klt):
            problems.append("canonical(0,1/4) but not foliated-lc and surface-klt")
        logp = [(v.const, v.eps) for v in d.log.values()]
        rawp = [(v.const, v.eps) for v in d.raw.values()]
        lc_some, can_some = lc_somewhere(logp, zero, fifth), lc_somewhere(rawp, zero, quarter)
        counts["lc_somewhere"] += lc_some
        counts["canonical_somewhere"] += can_some
        if lc_some and not (fol.lc and surf.lc):
            problems.append("lc at some e < 1/5 but not foliated-lc and surface-lc")
        if can_some and not (fol.lc and surf.klt):
            problems.append("canonical at some e < 1/4 but not foliated-lc and surface-klt")
        counts["lc_interval"] += lc.lc
        counts["klt_interval"] += lc.klt
        counts["canonical_interval"] += can.canonical
        if problems:
            bad.append({"key": _extra_key(g), "graph": g.to_json(), "problems": problems})
    bad.sort(key=lambda d: d["key"])
    return {"bounds": b.to_json(), "counts": counts, "counterexamples": bad,
            "elapsed": time.perf_counter() - t0}
