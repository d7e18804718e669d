"""Command-line driver.

Exit codes: 0 success, 2 validation failure, 3 reduction stuck,
4 invariant or verification failure, 5 I/O or format error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .couple import (
    ResourceLimitError,
    couple_from_json,
    couple_to_json,
    enumerate_couples,
    random_couple,
    validate_couple,
)
from .forest import add_edge_if_safe, init_forest
from .io import atomic_write, dot_text, read_json, write_json
from .molecule import (
    MoleculeError,
    is_base_molecule,
    molecule_from_couple,
    molecule_from_json,
    molecule_to_json,
    validate_molecule,
)
from .mst import DisconnectedGraphError, brute_force_mst, graph_from_json, kruskal, prim, total_weight
from .reduction import (
    Exhaustive,
    First,
    Random,
    ReductionConfig,
    ScriptError,
    Second,
    Stuck,
    parse_script,
    run_reduction,
    run_scripted,
    trace_from_jsonl,
    trace_to_jsonl,
)
from .reduction.engine import PathCapExceeded
from .reduction.steps import InvariantError, PreconditionError
from .verify import UniverseMismatch, verify_trace

log = logging.getLogger("molred")

OK, VALIDATION, STUCK, INVARIANT, IO = 0, 2, 3, 4, 5


class _Exit(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _load(path: str):
    try:
        return read_json(path)
    except OSError as exc:
        raise _Exit(IO, f"cannot read {path}: {exc.strerror or exc}") from None
    except json.JSONDecodeError as exc:
        raise _Exit(IO, f"{path} is not valid JSON: {exc}") from None


def _parse(fn, obj, path: str):
    try:
        return fn(obj)
    except (ValueError, KeyError, TypeError) as exc:
        raise _Exit(IO, f"{path}: {exc}") from None


def _emit(obj) -> None:
    print(json.dumps(obj, indent=2, sort_keys=True))


def _write_out(path, obj) -> None:
    try:
        write_json(path, obj)
    except OSError as exc:
        raise _Exit(IO, f"cannot write {path}: {exc}") from None


# ---------------------------------------------------------------- couple


def cmd_couple(args) -> int:
    if args.action == "validate":
        couple = _parse(couple_from_json, _load(args.file), args.file)
        rep = validate_couple(couple)
        _emit({"ok": rep.ok, "violations": [list(v) for v in rep.violations]})
        return OK if rep.ok else VALIDATION
    if args.action == "random":
        try:
            couple = random_couple(args.plus, args.minus, args.seed)
        except ValueError as exc:
            raise _Exit(VALIDATION, str(exc)) from None
        doc = couple_to_json(couple)
        if args.out:
            _write_out(args.out, doc)
        else:
            _emit(doc)
        return OK
    # enumerate
    count = 0
    try:
        for c in enumerate_couples(args.max_internal, limit=args.limit):
            count += 1
            if args.jsonl:
                print(json.dumps(couple_to_json(c), sort_keys=True))
    except ResourceLimitError as exc:
        raise _Exit(VALIDATION, str(exc)) from None
    except ValueError as exc:
        raise _Exit(VALIDATION, str(exc)) from None
    if not args.jsonl:
        _emit({"max_internal_nodes": args.max_internal, "couples": count})
    return OK


# ---------------------------------------------------------------- molecule


def cmd_molecule(args) -> int:
    if args.action == "from-couple":
        couple = _parse(couple_from_json, _load(args.file), args.file)
        names = None
        if args.names:
            names = _load(args.names).get("names")
        try:
            m = molecule_from_couple(couple, names=names)
        except MoleculeError as exc:
            raise _Exit(VALIDATION, str(exc)) from None
        doc = molecule_to_json(m, args.dimension)
        if args.out:
            _write_out(args.out, doc)
        else:
            _emit(doc)
        return OK
    # check
    m, dim = _parse(molecule_from_json, _load(args.file), args.file)
    rep = validate_molecule(m)
    base = is_base_molecule(m)
    _emit(
        {
            "ok": rep.ok,
            "violations": [list(v) for v in rep.violations],
            "atoms": len(m),
            "bonds": m.bond_count,
            "dimension": dim,
            "is_base": base.is_base,
            "degree_profile": {str(k): v for k, v in sorted(base.degree_profile.items())},
            "connected": base.connected,
        }
    )
    return OK if rep.ok else VALIDATION


# ---------------------------------------------------------------- reduce / verify


def _write_dots(directory: str, molecule, trace) -> None:
    """One DOT file per step: the starting molecule plus bonds injected so far, G so far in red."""
    out = Path(directory)
    shown = molecule.copy()
    forest = init_forest(shown)
    _dot(out / "step-00.dot", shown, forest)
    ends = {}
    for r in trace.records:
        for t, h, b in r.offered:
            ends[b] = (t, h)
        for b in r.bonds_injected:
            shown.insert_bond(b)
        for b in r.g_edges_added:
            add_edge_if_safe(forest, *ends[b], b)
        _dot(out / f"step-{r.index:02d}.dot", shown, forest)


def _dot(path: Path, m, forest) -> None:
    try:
        atomic_write(path, dot_text(m, forest, name=path.stem))
    except OSError as exc:
        raise _Exit(IO, f"cannot write {path}: {exc}") from None


def cmd_reduce(args) -> int:
    m, dim = _parse(molecule_from_json, _load(args.molecule), args.molecule)
    d = args.dimension or dim
    config = ReductionConfig(allow_initial_triple_bonds=args.allow_initial_triple_bonds)
    try:
        if args.script:
            script = parse_script(_load(args.script), m)
            traces, multi = [run_scripted(m, script, d=d)], False
        else:
            policy = {
                "first": First(),
                "second": Second(),
                "random": Random(args.seed),
                "exhaustive": Exhaustive(args.cap),
            }[args.policy]
            out = run_reduction(m, policy, config, d=d)
            multi = isinstance(out, list)
            traces = out if multi else [out]
    except ScriptError as exc:
        raise _Exit(VALIDATION, str(exc)) from None
    except Stuck as exc:
        raise _Exit(STUCK, f"reduction stuck: {exc}") from None
    except PathCapExceeded as exc:
        raise _Exit(STUCK, str(exc)) from None
    except PreconditionError as exc:
        raise _Exit(VALIDATION, str(exc)) from None
    except InvariantError as exc:
        raise _Exit(INVARIANT, str(exc)) from None
    except ValueError as exc:
        raise _Exit(IO, str(exc)) from None

    for i, tr in enumerate(traces):
        if args.trace:
            path = f"{args.trace}.{i}" if multi else args.trace
            try:
                atomic_write(path, trace_to_jsonl(tr))
            except OSError as exc:
                raise _Exit(IO, f"cannot write {path}: {exc}") from None
        if args.dot_dir:
            _write_dots(f"{args.dot_dir}/path-{i}" if multi else args.dot_dir, m, tr)
    summaries = [
        {
            "steps": len(tr.records),
            "spanning_tree": tr.spanning_tree,
            "edges": len(tr.forest.edges),
            "gamma_total": str(tr.ledger.gamma_total),
            "kappa_total": str(tr.ledger.kappa_total),
            "choices": list(tr.choices),
        }
        for tr in traces
    ]
    _emit({"paths": summaries} if multi else summaries[0])
    return OK if all(s["spanning_tree"] for s in summaries) else INVARIANT


def cmd_verify(args) -> int:
    m, dim = _parse(molecule_from_json, _load(args.molecule), args.molecule)
    try:
        text = Path(args.trace).read_text(encoding="utf-8")
    except OSError as exc:
        raise _Exit(IO, f"cannot read {args.trace}: {exc.strerror or exc}") from None
    records, summary = _parse(trace_from_jsonl, text, args.trace)
    d = args.dimension or summary.get("dimension") or dim
    try:
        rep = verify_trace(m, records, d=d)
    except UniverseMismatch as exc:
        raise _Exit(INVARIANT, str(exc)) from None
    _emit(rep.to_json())
    return OK if rep.ok else INVARIANT


# ---------------------------------------------------------------- mst


def _edge_text(e) -> str:
    return f"{e[0]}{e[1]}" if len(str(e[0])) == 1 and len(str(e[1])) == 1 else f"{e[0]}-{e[1]}"


def cmd_mst(args) -> int:
    g = _parse(graph_from_json, _load(args.graph), args.graph)
    try:
        if args.algorithm == "oracle":
            print(f"weight {brute_force_mst(g)}")
            return OK
        if args.algorithm == "kruskal":
            edges = kruskal(g)
        else:
            root = args.root if args.root is not None else (g.vertices[0] if g.vertices else None)
            edges = prim(g, root)
    except DisconnectedGraphError as exc:
        raise _Exit(VALIDATION, str(exc)) from None
    except KeyError as exc:
        raise _Exit(VALIDATION, str(exc.args[0])) from None
    except ValueError as exc:
        raise _Exit(VALIDATION, str(exc)) from None
    print(" ".join(_edge_text(e) for e in edges))
    print(f"weight {total_weight(edges)}")
    return OK


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="molred", description="Molecule reduction and spanning-tree construction for tree couples.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to standard error")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("couple", help="validate, draw or enumerate couples")
    csub = c.add_subparsers(dest="action", required=True)
    cv = csub.add_parser("validate")
    cv.add_argument("file")
    cr = csub.add_parser("random")
    cr.add_argument("--plus", type=int, required=True, help="internal nodes of the + tree")
    cr.add_argument("--minus", type=int, required=True, help="internal nodes of the - tree")
    cr.add_argument("--seed", type=int, default=0)
    cr.add_argument("--out")
    ce = csub.add_parser("enumerate")
    ce.add_argument("max_internal", type=int)
    ce.add_argument("--limit", type=int, default=2_000_000)
    ce.add_argument("--jsonl", action="store_true", help="print every couple instead of the count")
    c.set_defaults(func=cmd_couple)

    m = sub.add_parser("molecule", help="build or check molecules")
    msub = m.add_subparsers(dest="action", required=True)
    mf = msub.add_parser("from-couple")
    mf.add_argument("file")
    mf.add_argument("--names", help="JSON name map from node references to atom ids")
    mf.add_argument("--dimension", type=int, default=3)
    mf.add_argument("--out")
    mc = msub.add_parser("check")
    mc.add_argument("file")
    m.set_defaults(func=cmd_molecule)

    r = sub.add_parser("reduce", help="reduce a molecule and build its spanning tree")
    r.add_argument("molecule")
    r.add_argument("--policy", choices=["first", "second", "random", "exhaustive"], default="first")
    r.add_argument("--seed", type=int, default=0, help="seed for --policy random")
    r.add_argument("--cap", type=int, default=64, help="path cap for --policy exhaustive")
    r.add_argument("--script", help="JSON step script; overrides --policy")
    r.add_argument("--dimension", type=int)
    r.add_argument("--trace", help="write the trace as JSON lines")
    r.add_argument("--dot-dir", help="write one DOT file per step")
    r.add_argument("--allow-initial-triple-bonds", action="store_true")
    r.set_defaults(func=cmd_reduce)

    v = sub.add_parser("verify", help="replay a trace against its molecule")
    v.add_argument("molecule")
    v.add_argument("trace")
    v.add_argument("--dimension", type=int)
    v.set_defaults(func=cmd_verify)

    g = sub.add_parser("mst", help="classic minimum spanning trees")
    g.add_argument("algorithm", choices=["kruskal", "prim", "oracle"])
    g.add_argument("graph")
    g.add_argument("--root")
    g.set_defaults(func=cmd_mst)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s", stream=sys.stderr)
    if getattr(args, "dimension", None) is not None and args.dimension < 3:
        print("error: dimension must be at least 3", file=sys.stderr)
        return VALIDATION
    try:
        return args.func(args)
    except _Exit as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
