"""Independent checks of reduction traces, and brute-force oracles for small graphs.

Nothing here reuses the engine's molecule mutation or its disjoint-set
forest: the replay keeps its own bond table and answers cycle questions
by depth-first search.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Optional, Sequence, Union

from .molecule import BondKind, Molecule


@dataclass
class VerificationReport:
    spanning_tree_ok: bool = True
    replay_ok: bool = True
    table_ok: bool = True
    maximality_ok: bool = True
    injected_ok: bool = True
    failures: list[tuple[int, str]] = field(default_factory=list)
    edges: int = 0

    @property
    def ok(self) -> bool:
        return not self.failures

    def fail(self, flag: str, index: int, message: str) -> None:
        setattr(self, flag, False)
        self.failures.append((index, message))

    def to_json(self) -> dict:
        return {
            "ok": self.ok,
            "spanning_tree_ok": self.spanning_tree_ok,
            "replay_ok": self.replay_ok,
            "table_ok": self.table_ok,
            "maximality_ok": self.maximality_ok,
            "injected_ok": self.injected_ok,
            "edges": self.edges,
            "failures": [list(f) for f in self.failures],
        }


class UniverseMismatch(ValueError):
    """The trace mentions atoms or bonds the molecule never had."""


class _DfsForest:
    """Adjacency-list forest; connectivity by explicit search."""

    def __init__(self, vertices):
        self.adj = {v: [] for v in vertices}
        self.size = 0

    def connected(self, a, b) -> bool:
        if a == b:
            return True
        seen, stack = {a}, [a]
        while stack:
            x = stack.pop()
            for y in self.adj[x]:
                if y == b:
                    return True
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        return False

    def add(self, a, b) -> None:
        self.adj[a].append(b)
        self.adj[b].append(a)
        self.size += 1

    def components(self) -> list[set]:
        seen, out = set(), []
        for v in self.adj:
            if v in seen:
                continue
            comp, stack = {v}, [v]
            while stack:
                x = stack.pop()
                for y in self.adj[x]:
                    if y not in comp:
                        comp.add(y)
                        stack.append(y)
            seen |= comp
            out.append(comp)
        return out

    def acyclic(self) -> bool:
        return self.size == len(self.adj) - len(self.components())


def _chi(atoms: set, bonds: dict) -> int:
    adj = {a: [] for a in atoms}
    for t, h, _ in bonds.values():
        adj[t].append(h)
        adj[h].append(t)
    seen, comps = set(), 0
    for a in atoms:
        if a in seen:
            continue
        comps += 1
        seen.add(a)
        stack = [a]
        while stack:
            x = stack.pop()
            for y in adj[x]:
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
    return len(bonds) - len(atoms) + comps


def verify_trace(original: Molecule, trace, d: int = 3) -> VerificationReport:
    """Replay ``trace`` against ``original`` from scratch and check every invariant.

    ``trace`` is a Trace or a plain list of StepRecords.
    """
    from .reduction.engine import ledger_check  # table knowledge only

    records = trace.records if hasattr(trace, "records") else list(trace)
    rep = VerificationReport()
    atoms = set(original.atom_ids())
    bonds = {b.id: (b.tail, b.head, b.kind) for b in original.bonds()}
    universe_atoms = set(atoms)
    next_id = original.next_bond_id
    for r in records:
        for a in r.atoms_removed:
            if a not in universe_atoms:
                raise UniverseMismatch(f"step {r.index} removes unknown atom {a!r}")

    chi0 = _chi(atoms, bonds)
    forest = _DfsForest(sorted(atoms))
    removed_once: dict[int, int] = {}
    atom_removed_at: dict[str, int] = {}
    injected_ids: set[int] = set()
    total_dchi = 0
    before = chi0

    for r in records:
        i = r.index
        gone = {}
        for b in r.bonds_removed:
            if b in removed_once:
                rep.fail("replay_ok", i, f"bond {b} removed twice (first at step {removed_once[b]})")
                continue
            if b not in bonds:
                rep.fail("replay_ok", i, f"bond {b} is not present")
                continue
            removed_once[b] = i
            gone[b] = bonds.pop(b)
        for a in r.atoms_removed:
            if a in atom_removed_at:
                rep.fail("replay_ok", i, f"atom {a} removed twice")
                continue
            if a not in atoms:
                rep.fail("replay_ok", i, f"atom {a} is not present")
                continue
            left = [b for b, (t, h, _) in bonds.items() if a in (t, h)]
            if left:
                rep.fail("replay_ok", i, f"atom {a} removed while bonds {left} remain")
            atom_removed_at[a] = i
            atoms.discard(a)
        for b in r.bonds_injected:
            if b.id < next_id or b.id in bonds:
                rep.fail("replay_ok", i, f"injected bond id {b.id} is not fresh")
            if b.tail not in atoms or b.head not in atoms:
                rep.fail("replay_ok", i, f"injected bond {b.id} touches a removed atom")
                continue
            bonds[b.id] = (b.tail, b.head, BondKind.INJECTED)
            injected_ids.add(b.id)
            next_id = max(next_id, b.id + 1)
        after = _chi(atoms, bonds)
        dchi, before = after - before, after
        total_dchi += dchi
        if dchi != r.delta_chi_computed:
            rep.fail("replay_ok", i, f"delta chi recomputes to {dchi}, record says {r.delta_chi_computed}")

        added, rejected = list(r.g_edges_added), list(r.g_edges_rejected)
        if set(added) & set(rejected):
            rep.fail("replay_ok", i, "a bond is both added and rejected")
        if sorted(added + rejected) != sorted(r.bonds_removed):
            rep.fail("replay_ok", i, "added and rejected bonds do not partition the removed bonds")

        for b in added:
            if b in injected_ids:
                rep.fail("injected_ok", i, f"injected bond {b} entered G")
        # greedy pass in offer order, cross-checked by search
        order = [e[2] for e in r.offered] if r.offered else sorted(r.bonds_removed)
        added_set = set(added)
        for b in order:
            if b not in gone:
                continue
            t, h, _ = gone[b]
            cyc = forest.connected(t, h)
            if b in added_set:
                if cyc:
                    rep.fail("maximality_ok", i, f"bond {b} closes a cycle in G but was added")
                else:
                    forest.add(t, h)
            elif not cyc:
                rep.fail("maximality_ok", i, f"bond {b} was rejected although it joins two components")
        for b in rejected:
            if b in gone and not forest.connected(gone[b][0], gone[b][1]):
                rep.fail("maximality_ok", i, f"rejected bond {b} ends in different components after the step")
        if not forest.acyclic():
            rep.fail("spanning_tree_ok", i, "G has a cycle")

    if bonds:
        rep.fail("replay_ok", len(records), f"{len(bonds)} bonds were never removed")
    if total_dchi != -chi0:
        rep.fail("replay_ok", len(records), f"delta chi sums to {total_dchi}, expected {-chi0}")
    if len(records) > 2 * len(original):
        rep.fail("replay_ok", len(records), f"{len(records)} steps exceed twice the atom count")

    lr = ledger_check(records, d)
    for idx, msg in lr.violations:
        rep.fail("table_ok", idx, msg)
    for r in records:
        if r.kind.value in ("DA", "BR", "TB1", "TB2") and r.table_checked:
            rep.fail("table_ok", r.index, f"{r.kind.value} must be flagged table-unchecked")

    rep.edges = forest.size
    n = len(forest.adj)
    if forest.size != max(n - 1, 0) or len(forest.components()) > 1:
        rep.fail("spanning_tree_ok", len(records), f"G has {forest.size} edges and {len(forest.components())} components over {n} atoms")
    return rep


# ---------------------------------------------------------------- oracles


class SizeLimitError(ValueError):
    pass


def brute_force_spanning_trees(vertices: Sequence, edges: Sequence[tuple]) -> list[frozenset]:
    """Every spanning tree, as a frozenset of edge indices, by trying all edge subsets of size |V|-1.

    ``edges`` is a list of endpoint pairs; parallel edges are distinct edges.
    """
    vs = list(vertices)
    if len(vs) > 10 or len(edges) > 20:
        raise SizeLimitError("brute force is limited to 10 vertices and 20 edges")
    index = {v: i for i, v in enumerate(vs)}
    ends = [(index[e[0]], index[e[1]]) for e in edges]
    n = len(vs)
    if n == 0:
        return []
    out = []
    for combo in combinations(range(len(ends)), n - 1):
        parent = list(range(n))
        for k in combo:
            a, b = ends[k]
            while parent[a] != a:
                a = parent[a]
            while parent[b] != b:
                b = parent[b]
            if a == b:
                break
            parent[a] = b
        else:
            out.append(frozenset(combo))
    return out


def underlying_graph(molecule: Molecule, simple: bool = True) -> tuple[list[str], list[tuple[str, str]]]:
    """Vertices and undirected edges of a molecule; ``simple`` merges parallel bonds."""
    if simple:
        pairs = sorted({b.pair for b in molecule.bonds()})
    else:
        pairs = [b.pair for b in molecule.bonds()]
    return molecule.atom_ids(), pairs


def multiple_components_witness(steps) -> Optional[int]:
    """First step (1-based) after which G has two or more non-singleton components.

    ``steps`` is a Trace, a list of StepRecords or a list of per-step edge
    lists such as ``[[("C", "E")], [("A", "B")]]``.
    """
    if hasattr(steps, "records"):
        steps = steps.records
    steps = list(steps)
    batches = []
    if steps and hasattr(steps[0], "offered"):
        for r in steps:
            ends = {e[2]: e[:2] for e in r.offered}
            batches.append([ends[b] for b in r.g_edges_added])
    else:
        batches = [list(s) for s in steps]
    vertices = {v for batch in batches for e in batch for v in e}
    forest = _DfsForest(sorted(vertices))
    for i, batch in enumerate(batches, start=1):
        for a, b in batch:
            forest.add(a, b)
        if sum(1 for c in forest.components() if len(c) > 1) >= 2:
            return i
    return None
