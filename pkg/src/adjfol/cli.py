"""Command-line interface.

Exit codes: 0 success, 1 a verification found mismatches, 2 bad input.
JSON output keeps a fixed field order and exact "p/q" rationals, so equal
inputs give byte-identical output.
"""
from __future__ import annotations

import argparse
import json
import os
import re
import sys
from fractions import Fraction
from typing import Optional, Sequence

from . import __version__
from .adjoint import Convention, NotNegativeDefiniteError, discrepancies, grade, point_grade
from .blowup import ParseError, parse_vf
from .blowup.reduction import (ReductionError, camacho_sad_check, extract_graph, index_table,
                               ledger_discrepancies, reduce)
from .chains import ChainError, gamma_closed_form, lambda_mu, m_divisor
from .enumeration import Bounds, cross_check_prop15, generate_keyed, verify_theorem
from .exactnum import EpsAffine, format_rational, parse_rational
from .graph import DecoratedGraph, GraphError, validate
from .patterns import all_matches, is_chain_graph, recognize_blocks

THEOREM_CHOICES = ("main-lc", "main-can", "surf-lc", "fol-lc")
DEFAULT_INTERVALS = {"main-lc": ("0", "1/5"), "main-can": ("0", "1/4")}


class InputError(Exception):
    pass


def _dump(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _rational(s: str) -> Fraction:
    try:
        return parse_rational(s)
    except (ValueError, ZeroDivisionError) as exc:
        raise InputError(f"not an exact rational: {s!r} ({exc})") from None


_EPS_TERM = re.compile(r"([+-]?)\s*([0-9/]*)\s*\*?\s*(e?)")


def parse_eps_affine(s: str) -> EpsAffine:
    """'-1+4e', '2*e', '1/3', '-e' and similar."""
    text = s.replace(" ", "")
    if not text:
        raise InputError("empty value")
    const, eps = Fraction(0), Fraction(0)
    pos = 0
    while pos < len(text):
        m = _EPS_TERM.match(text, pos)
        if not m or m.end() == pos:
            raise InputError(f"cannot read {s!r} as c + d*e")
        sign, num, e = m.groups()
        if not num and not e:
            raise InputError(f"cannot read {s!r} as c + d*e")
        val = _rational(num) if num else Fraction(1)
        if sign == "-":
            val = -val
        if e:
            eps += val
        else:
            const += val
        pos = m.end()
    return EpsAffine(const, eps)


def _load_graph(path: str) -> DecoratedGraph:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except FileNotFoundError:
        raise InputError(f"no such file: {path}") from None
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    try:
        return DecoratedGraph.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None
    except (GraphError, KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{path}: {exc}") from None


def _graph_from_args(args):
    if getattr(args, "graph", None):
        return _load_graph(args.graph), None
    tree = reduce(parse_vf(args.form), args.max_depth)
    return extract_graph(tree), tree


def _interval(args, theorem: Optional[str] = None):
    if args.epsilon_interval:
        lo, hi = (_rational(x) for x in args.epsilon_interval)
        if lo >= hi:
            raise InputError("empty epsilon interval")
        return lo, hi
    lo, hi = DEFAULT_INTERVALS.get(theorem or "", ("0", "1/5"))
    return Fraction(lo), Fraction(hi)


def _grades(g, convention: Convention, args, result=None) -> dict:
    delta = _rational(args.delta) if getattr(args, "delta", None) else None
    if convention is not Convention.ADJOINT:
        return grade(g, convention=convention, delta=delta, result=result).to_json()
    if args.epsilon:
        return point_grade(g, _rational(args.epsilon), delta=delta, result=result).to_json()
    lo, hi = _interval(args)
    return grade(g, lo, hi, delta=delta, result=result).to_json()


# subcommands


def cmd_classify(args) -> tuple[int, object]:
    g, _ = _graph_from_args(args)
    theorems = [args.theorem] if args.theorem else list(THEOREM_CHOICES)
    out = {}
    for th in theorems:
        lo, hi = _interval(args, th)
        matches = all_matches(g, th, lo, hi)
        if matches:
            tag = matches[0]
            entry = {"family": tag.code, "parameters": list(tag.parameters), "annotations": list(tag.annotations)}
            if len(matches) > 1:
                entry["also"] = [m.code for m in matches[1:]]
        else:
            entry = {"family": None, "reason": _no_match_reason(g)}
        try:
            conv = {"surf-lc": Convention.SURFACE, "fol-lc": Convention.FOLIATED}.get(th, Convention.ADJOINT)
            if conv is Convention.ADJOINT:
                entry["grades"] = grade(g, lo, hi).to_json()
            else:
                entry["grades"] = grade(g, convention=conv).to_json()
        except NotNegativeDefiniteError:
            entry["grades"] = None
        out[th] = entry
    if args.theorem:
        out = out[args.theorem]
    if args.format == "text":
        return 0, _text_classify(out if not args.theorem else {args.theorem: out})
    return 0, out


def _no_match_reason(g) -> str:
    problems = validate(g)
    if problems:
        return "; ".join(f"{v.code}: {v.message}" for v in problems)
    blocks = [b.label for b in recognize_blocks(g)]
    return "no family matches" + (f" (blocks: {', '.join(blocks)})" if blocks else "")


def _text_classify(d: dict) -> str:
    lines = []
    for th, e in d.items():
        fam = e["family"] or "none"
        notes = ", ".join(e.get("annotations", []))
        lines.append(f"{th}: {fam}" + (f" [{notes}]" if notes else "") +
                     (f" ({e['reason']})" if e["family"] is None else ""))
    return "\n".join(lines) + "\n"


def cmd_discrepancy(args) -> tuple[int, object]:
    g, _ = _graph_from_args(args)
    conv = Convention.parse(args.convention)
    res = discrepancies(g, conv)
    out = {"convention": conv.value}
    if args.epsilon and conv is Convention.ADJOINT:
        e = _rational(args.epsilon)
        out["epsilon"] = format_rational(e)
        out.update(res.to_json(e))
    else:
        out.update(res.to_json())
    out["grades"] = _grades(g, conv, args, res)
    if args.format == "text":
        raw = dict(res.raw.items())
        lines = [f"{cid}: log {a}, raw {raw[cid]}" for cid, a in res.log.items()]
        lines.append("grades: " + ", ".join(f"{k}={out['grades'][k]}" for k in ("terminal", "canonical", "klt", "lc")))
        return 0, "\n".join(lines) + "\n"
    return 0, out


def cmd_chain_info(args) -> tuple[int, object]:
    g, _ = _graph_from_args(args)
    chain = args.chain.split(",") if args.chain else is_chain_graph(g)
    if not chain:
        raise InputError("the graph is not a chain; pass --chain id1,id2,...")
    cd = lambda_mu(g, chain)
    out = cd.to_json()
    out["identity_failures"] = cd.identity_failures()
    if args.d_dot:
        dots = [parse_eps_affine(x) for x in args.d_dot.split(",")]
        if len(dots) != len(chain):
            raise InputError(f"--d-dot needs {len(chain)} values")
        gam = gamma_closed_form(cd, dots)
        out["d_dot"] = [d.to_json() for d in dots]
        out["gamma"] = [x.to_json() for x in gam]
        out["gamma_solver"] = m_divisor(g, chain, dict(zip(chain, dots))).to_json()
    if args.format == "text":
        lines = [f"chain: {' - '.join(chain)}", f"lambda: {list(cd.lam)}", f"mu: {list(cd.mu)}", f"n: {cd.n}"]
        if args.d_dot:
            lines.append("gamma: " + ", ".join(str(EpsAffine.from_json(x)) for x in out["gamma"]))
        return 0, "\n".join(lines) + "\n"
    return 0, out


def cmd_resolve(args) -> tuple[int, object]:
    vf = parse_vf(args.form)
    tree = reduce(vf, args.max_depth)
    emit = set((args.emit or "graph,ledger").split(","))
    unknown = emit - {"graph", "ledger", "dot", "tree", "cs"}
    if unknown:
        raise InputError(f"unknown --emit items: {', '.join(sorted(unknown))}")
    g = extract_graph(tree)
    out = {"form": args.form, "field": vf.to_json(), "blowups": tree.n_blowups,
           "curves": tree.curves}
    if "tree" in emit:
        out["tree"] = tree.to_json()
    if "ledger" in emit:
        out["kf"] = {c: tree.kf[c] for c in tree.curves}
        out["kx"] = {c: tree.kx[c] for c in tree.curves}
        out["indices"] = index_table(tree)
        led = ledger_discrepancies(tree)
        out["raw"] = led.to_json_at(_rational(args.epsilon)) if args.epsilon else led.to_json()
    if "graph" in emit:
        out["graph"] = g.to_json()
    if "cs" in emit:
        out["camacho_sad"] = camacho_sad_check(tree)
    if g.curves:
        res = discrepancies(g)
        if args.epsilon:
            e = _rational(args.epsilon)
            out["epsilon"] = format_rational(e)
            out["grades"] = point_grade(g, e, result=res).to_json()
        elif args.epsilon_interval:
            out["grades"] = _grades(g, Convention.ADJOINT, args, res)
        out["foliated_grades"] = grade(g, convention=Convention.FOLIATED).to_json()
    if args.graph_out:
        with open(args.graph_out, "w", encoding="utf-8") as fh:
            fh.write(g.dumps() + "\n")
    if args.format == "dot" or ("dot" in emit and args.format == "text"):
        return 0, g.to_dot() + "\n"
    if "dot" in emit:
        out["dot"] = g.to_dot()
    if args.format == "text":
        lines = [f"{tree.n_blowups} blowups"]
        for c in tree.curves:
            row = g.curve(c)
            tag = f"Z={row.z}" if row.invariant else f"tang={row.tang}"
            lines.append(f"{c}: self {tree.self_int[c]}, {tag}, kf {tree.kf[c]}, kx {tree.kx[c]}")
        return 0, "\n".join(lines) + "\n"
    return 0, out


def _bounds(args) -> Bounds:
    try:
        return Bounds(max_curves=args.max_curves, min_self=args.min_self, max_z=args.max_z,
                      max_tang=args.max_tang, allow_nodal=not args.no_nodal,
                      allow_genus1=not args.no_genus1, max_edge_mult=args.max_edge_mult,
                      surface=getattr(args, "surface", False))
    except ValueError as exc:
        raise InputError(str(exc)) from None


def cmd_enumerate(args) -> tuple[int, object]:
    b = _bounds(args)
    lines = [json.dumps({"key": k, "graph": g.to_json()}, separators=(",", ":")) for k, g in generate_keyed(b)]
    if args.format == "dot":
        return 0, "".join(g.to_dot(f"G{i}") + "\n" for i, (_, g) in enumerate(generate_keyed(b)))
    return 0, "".join(line + "\n" for line in lines)


def cmd_verify(args) -> tuple[int, object]:
    if not args.theorem:
        raise InputError("--theorem is required")
    b = _bounds(args)
    lo = hi = None
    if args.theorem in ("main-lc", "main-can"):
        lo, hi = _interval(args, args.theorem)
    rep = verify_theorem(b, args.theorem, lo, hi, jobs=args.jobs, pointwise=args.pointwise)
    out = rep.to_json(with_keys=args.with_keys)
    out["pointwise"] = args.pointwise
    out["ok"] = rep.ok
    if args.format == "text":
        text = (f"{rep.theorem} on {out['interval']}: {len(rep.lc_set)} graphs in the hypothesis set, "
                f"{len(rep.unmatched_lc)} unmatched, {len(rep.family_instances_failing_lc)} failing instances, "
                f"{len(rep.annotation_violations)} annotation violations\n")
        return (0 if rep.ok else 1), text
    return (0 if rep.ok else 1), out


def cmd_cross_check(args) -> tuple[int, object]:
    b = _bounds(args)
    rep = cross_check_prop15(b, jobs=args.jobs)
    rep.pop("elapsed", None)
    bad = bool(rep["counterexamples"])
    if args.format == "text":
        return (1 if bad else 0), f"{rep['counts']['graphs']} graphs, {len(rep['counterexamples'])} counterexamples\n"
    return (1 if bad else 0), rep


# parser


def _add_input(p, form_ok=True):
    grp = p.add_mutually_exclusive_group(required=True)
    grp.add_argument("--graph", metavar="PATH", help="decorated graph JSON file")
    if form_ok:
        grp.add_argument("--form", metavar="STRING", help='germ, e.g. "omega: x dx + y^2 dy"')
    p.add_argument("--max-depth", type=int, default=32, help="blowup depth limit for --form")


def _add_eps(p):
    p.add_argument("--epsilon", metavar="P/Q", help="a single value of e")
    p.add_argument("--epsilon-interval", nargs=2, metavar=("LO", "HI"), help="open interval of e")


def _add_bounds(p, max_curves=4, min_self=-4):
    p.add_argument("--max-curves", type=int, default=max_curves)
    p.add_argument("--min-self", type=int, default=min_self)
    p.add_argument("--max-z", type=int, default=4)
    p.add_argument("--max-tang", type=int, default=1)
    p.add_argument("--max-edge-mult", type=int, default=2)
    p.add_argument("--no-nodal", action="store_true")
    p.add_argument("--no-genus1", action="store_true")
    p.add_argument("--jobs", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="adjfol", description="Adjoint foliated singularities on dual graphs.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "text", "dot"), default="json")
    common.add_argument("--out", metavar="PATH", help="write output here instead of stdout")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", parents=[common], help="match a graph against the family lists")
    _add_input(p)
    _add_eps(p)
    p.add_argument("--theorem", choices=THEOREM_CHOICES)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("discrepancy", parents=[common], help="log and raw discrepancies with grades")
    _add_input(p)
    _add_eps(p)
    p.add_argument("--convention", choices=("adjoint", "foliated", "surface"), default="adjoint")
    p.add_argument("--delta", metavar="P/Q", help="also test (e, delta)-adjoint lc")
    p.set_defaults(func=cmd_discrepancy)

    p = sub.add_parser("chain-info", parents=[common], help="lambda, mu, n and gamma for a chain")
    _add_input(p)
    p.add_argument("--chain", metavar="IDS", help="comma-separated chain curve ids in order")
    p.add_argument("--d-dot", metavar="VALUES", help="comma-separated D.C_i, e.g. -1+4e,0,e")
    p.set_defaults(func=cmd_chain_info)

    p = sub.add_parser("resolve", parents=[common], help="reduce a germ and read off its graph")
    p.add_argument("form_pos", nargs="?", metavar="FORM", help="germ (same as --form)")
    p.add_argument("--form", metavar="STRING")
    p.add_argument("--max-depth", type=int, default=32)
    p.add_argument("--emit", metavar="ITEMS", help="comma list of graph,ledger,dot,tree,cs")
    p.add_argument("--graph-out", metavar="PATH", help="also write the extracted graph file")
    _add_eps(p)
    p.set_defaults(func=cmd_resolve)

    p = sub.add_parser("enumerate", parents=[common], help="emit every decorated graph within bounds (JSON lines)")
    _add_bounds(p)
    p.add_argument("--surface", action="store_true", help="undecorated curves for the surface sweep")
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("verify-theorem", parents=[common], help="completeness and soundness sweep")
    p.add_argument("--theorem", choices=THEOREM_CHOICES)
    _add_eps(p)
    _add_bounds(p)
    p.add_argument("--pointwise", action="store_true",
                   help="hypothesis holds at some e in the interval instead of all e")
    p.add_argument("--with-keys", action="store_true", help="include the canonical keys of the hypothesis set")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("cross-check", parents=[common], help="adjoint grades against foliated and surface grades")
    _add_bounds(p)
    p.set_defaults(func=cmd_cross_check)
    return parser


def run(argv: Optional[Sequence[str]] = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command == "resolve":
        if args.form and args.form_pos:
            print("adjfol: give the form once", file=stderr)
            return 2
        args.form = args.form or args.form_pos
        if not args.form:
            print("adjfol: resolve needs a form", file=stderr)
            return 2
    try:
        code, out = args.func(args)
    except (InputError, ParseError, GraphError, ChainError, NotNegativeDefiniteError) as exc:
        print(f"adjfol: {exc}", file=stderr)
        return 2
    except ReductionError as exc:
        print(f"adjfol: {exc}", file=stderr)
        return 2
    except ValueError as exc:
        print(f"adjfol: {exc}", file=stderr)
        return 2
    text = out if isinstance(out, str) else _dump(out)
    if args.out:
        try:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as exc:
            print(f"adjfol: cannot write {args.out}: {exc.strerror}", file=stderr)
            return 2
    else:
        stdout.write(text)
    return code


def main() -> None:
    try:
        code = run()
        sys.stdout.flush()
    except BrokenPipeError:
        # output closed early, e.g. piped into head
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        code = 0
    sys.exit(code)


if __name__ == "__main__":
    main()
