"""Directed multigraphs of atoms and bonds, and their construction from couples."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Iterable, Mapping, Optional

from .couple import MINUS, PLUS, Couple, SignedTree, make_ref, parent_ref, sibling_pairs, validate_couple, ValidationReport


class BondKind(str, Enum):
    PC = "PC"
    LP = "LP"
    INJECTED = "INJECTED"


class MoleculeError(ValueError):
    """Structural problem with a molecule or its construction."""


@dataclass(frozen=True)
class Atom:
    id: str
    degenerate: bool = False
    provenance: Optional[str] = None


@dataclass(frozen=True)
class Bond:
    id: int
    tail: str
    head: str
    kind: BondKind = BondKind.PC

    def other(self, atom: str) -> str:
        return self.head if atom == self.tail else self.tail

    @property
    def pair(self) -> tuple[str, str]:
        return (self.tail, self.head) if self.tail <= self.head else (self.head, self.tail)


class Molecule:
    """Mutable directed multigraph.

    Bond ids are unique and never reused: the next fresh id is always one
    more than the largest id ever present.
    """

    __slots__ = ("_atoms", "_bonds", "_inc", "_next_id")

    def __init__(self, atoms: Iterable[Atom] = (), bonds: Iterable[Bond] = ()):
        self._atoms: dict[str, Atom] = {}
        self._bonds: dict[int, Bond] = {}
        self._inc: dict[str, set[int]] = {}
        self._next_id = 0
        for a in atoms:
            self.add_atom(a)
        for b in bonds:
            self.insert_bond(b)

    # -- construction
    def add_atom(self, atom: Atom) -> None:
        if atom.id in self._atoms:
            raise MoleculeError(f"duplicate atom id {atom.id!r}")
        self._atoms[atom.id] = atom
        self._inc[atom.id] = set()

    def insert_bond(self, bond: Bond) -> Bond:
        if bond.id in self._bonds:
            raise MoleculeError(f"duplicate bond id {bond.id}")
        if bond.id < self._next_id:
            raise MoleculeError(f"bond id {bond.id} was already used")
        if bond.tail not in self._atoms or bond.head not in self._atoms:
            raise MoleculeError(f"bond {bond.id} references an unknown atom")
        if bond.tail == bond.head:
            raise MoleculeError(f"bond {bond.id} is a self-loop on {bond.tail!r}")
        self._bonds[bond.id] = bond
        self._inc[bond.tail].add(bond.id)
        self._inc[bond.head].add(bond.id)
        self._next_id = bond.id + 1
        return bond

    def add_bond(self, tail: str, head: str, kind: BondKind = BondKind.PC) -> Bond:
        return self.insert_bond(Bond(self._next_id, tail, head, kind))

    def remove_bond(self, bond_id: int) -> Bond:
        b = self._bonds.pop(bond_id)
        self._inc[b.tail].discard(bond_id)
        self._inc[b.head].discard(bond_id)
        return b

    def remove_atom(self, atom_id: str) -> Atom:
        if self._inc[atom_id]:
            raise MoleculeError(f"atom {atom_id!r} still has bonds")
        del self._inc[atom_id]
        return self._atoms.pop(atom_id)

    def copy(self) -> "Molecule":
        m = Molecule.__new__(Molecule)
        m._atoms = dict(self._atoms)
        m._bonds = dict(self._bonds)
        m._inc = {k: set(v) for k, v in self._inc.items()}
        m._next_id = self._next_id
        return m

    # -- queries
    @property
    def next_bond_id(self) -> int:
        return self._next_id

    def atom_ids(self) -> list[str]:
        return sorted(self._atoms)

    def atoms(self) -> list[Atom]:
        return [self._atoms[k] for k in sorted(self._atoms)]

    def bonds(self) -> list[Bond]:
        return [self._bonds[k] for k in sorted(self._bonds)]

    def bond_ids(self) -> list[int]:
        return sorted(self._bonds)

    def atom(self, atom_id: str) -> Atom:
        try:
            return self._atoms[atom_id]
        except KeyError:
            raise KeyError(f"unknown atom {atom_id!r}") from None

    def bond(self, bond_id: int) -> Bond:
        return self._bonds[bond_id]

    def has_atom(self, atom_id: str) -> bool:
        return atom_id in self._atoms

    def has_bond(self, bond_id: int) -> bool:
        return bond_id in self._bonds

    def __len__(self) -> int:
        return len(self._atoms)

    @property
    def bond_count(self) -> int:
        return len(self._bonds)

    def incident(self, atom_id: str) -> list[int]:
        return sorted(self._inc[atom_id])

    def degree(self, atom_id: str) -> int:
        try:
            return len(self._inc[atom_id])
        except KeyError:
            raise KeyError(f"unknown atom {atom_id!r}") from None

    def in_degree(self, atom_id: str) -> int:
        return sum(1 for b in self._inc[atom_id] if self._bonds[b].head == atom_id)

    def out_degree(self, atom_id: str) -> int:
        return sum(1 for b in self._inc[atom_id] if self._bonds[b].tail == atom_id)

    def neighbors(self, atom_id: str) -> list[str]:
        return sorted({self._bonds[b].other(atom_id) for b in self._inc[atom_id]})

    def bonds_between(self, a: str, b: str) -> list[Bond]:
        bs = self._bonds
        return [bs[i] for i in sorted(self._inc[a]) if bs[i].other(a) == b]

    def multiplicity(self, a: str, b: str) -> int:
        bs = self._bonds
        return sum(1 for i in self._inc[a] if bs[i].other(a) == b)

    def signature(self) -> tuple:
        """Hashable value identifying the labeled molecule including bond ids."""
        return (
            tuple((a.id, a.degenerate) for a in self.atoms()),
            tuple((b.id, b.tail, b.head, b.kind.value) for b in self.bonds()),
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, Molecule):
            return NotImplemented
        return self._atoms == other._atoms and self._bonds == other._bonds

    __hash__ = None  # mutable

    def __repr__(self) -> str:
        return f"Molecule({len(self._atoms)} atoms, {len(self._bonds)} bonds)"

    def renamed(self, names: Mapping[str, str]) -> "Molecule":
        """Copy with atom ids replaced through ``names`` (ids not in the map are kept)."""
        ren = lambda x: names.get(x, x)
        atoms = [Atom(ren(a.id), a.degenerate, a.provenance) for a in self._atoms.values()]
        bonds = [Bond(b.id, ren(b.tail), ren(b.head), b.kind) for b in self.bonds()]
        return Molecule(atoms, bonds)


def same_labeled_graph(a: Molecule, b: Molecule) -> bool:
    """Equal atom id sets and equal multisets of directed (tail, head) bonds; bond ids ignored."""
    if set(a.atom_ids()) != set(b.atom_ids()):
        return False
    return Counter((x.tail, x.head) for x in a.bonds()) == Counter((x.tail, x.head) for x in b.bonds())


# ---------------------------------------------------------------- from couples


@lru_cache(maxsize=4096)
def _tree_plan(tree: SignedTree, tag: str):
    """Internal refs, PC bond endpoints and a leaf -> (atom, sign) table for one tree."""
    internal, pc, leaf_atom = [], [], {}
    for path, nd in tree.nodes():
        ref = make_ref(tag, path)
        par = parent_ref(ref)
        if nd.is_leaf:
            leaf_atom[ref] = (par, nd.sign)
            continue
        internal.append(ref)
        if par is not None:
            # the node is a child in its parent's atom and the parent of its own atom
            pc.append((ref, par) if nd.sign > 0 else (par, ref))
    return tuple(internal), tuple(pc), leaf_atom


def _lp_endpoints(couple: Couple) -> tuple[tuple[str, str], ...]:
    _, _, lp = _tree_plan(couple.plus, PLUS)
    _, _, lm = _tree_plan(couple.minus, MINUS)
    out = []
    for a, b in couple.pairing:
        ia = lp.get(a) or lm.get(a)
        ib = lp.get(b) or lm.get(b)
        if ia is None or ib is None:
            raise MoleculeError(f"pair {a}~{b} does not join two leaves")
        if ia[1] == ib[1]:
            raise MoleculeError(f"pair {a}~{b} joins leaves of the same sign")
        # from the atom holding the - leaf to the atom holding the + leaf
        out.append((ib[0], ia[0]) if ia[1] > 0 else (ia[0], ib[0]))
    out.sort()
    return tuple(out)


def molecule_key(couple: Couple) -> tuple:
    """A value that determines ``molecule_from_couple(couple)`` completely.

    Couples with equal keys produce identical molecules, bond ids included,
    because leaf-pair bonds are laid out in sorted endpoint order.
    """
    return couple.plus, couple.minus, _lp_endpoints(couple)


def molecule_from_couple(couple: Couple, names: Optional[Mapping[str, str]] = None, check: bool = True) -> Molecule:
    """Build the molecule of a couple: one atom per internal node.

    Atom ids are internal-node references such as ``"-/1/2"`` unless
    ``names`` maps them elsewhere; provenance always keeps the reference.
    Bonds come in a fixed order: parent-child bonds in preorder of the child
    node (plus tree first), then leaf-pair bonds sorted by endpoints.
    """
    if check:
        rep = validate_couple(couple)
        if not rep.ok:
            raise MoleculeError(f"invalid couple: {rep.violations[0]}")
        sib = sibling_pairs(couple)
        if sib:
            raise MoleculeError(f"pair {sib[0][0]}~{sib[0][1]} joins sibling leaves and would form a self-loop")
    ip, pcp, _ = _tree_plan(couple.plus, PLUS)
    im, pcm, _ = _tree_plan(couple.minus, MINUS)
    ren = (lambda x: names.get(x, x)) if names else (lambda x: x)
    m = Molecule(Atom(ren(r), False, r) for r in ip + im)
    for t, h in pcp + pcm:
        m.add_bond(ren(t), ren(h), BondKind.PC)
    for t, h in _lp_endpoints(couple):
        m.add_bond(ren(t), ren(h), BondKind.LP)
    if check:
        for a in m.atom_ids():
            if m.in_degree(a) > 2 or m.out_degree(a) > 2:
                raise MoleculeError(f"atom {a!r} breaks the two-in two-out cap")
    return m


# ---------------------------------------------------------------- structure


def degree(molecule: Molecule, atom_id: str) -> int:
    return molecule.degree(atom_id)


def components(molecule: Molecule) -> list[list[str]]:
    """Undirected connected components, each sorted, ordered by their smallest id."""
    seen: set[str] = set()
    out = []
    for a in molecule.atom_ids():
        if a in seen:
            continue
        comp, stack = [], [a]
        seen.add(a)
        while stack:
            x = stack.pop()
            comp.append(x)
            for b in molecule._inc[x]:
                y = molecule._bonds[b].other(x)
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        out.append(sorted(comp))
    return out


def component_count(molecule: Molecule) -> int:
    inc, bonds = molecule._inc, molecule._bonds
    seen: set[str] = set()
    count = 0
    for a in inc:
        if a in seen:
            continue
        count += 1
        seen.add(a)
        stack = [a]
        while stack:
            x = stack.pop()
            for b in inc[x]:
                bd = bonds[b]
                y = bd.head if bd.tail == x else bd.tail
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
    return count


def euler_characteristic(molecule: Molecule) -> int:
    """|bonds| - |atoms| + number of components (isolated atoms included)."""
    return molecule.bond_count - len(molecule) + component_count(molecule)


def find_bridges(molecule: Molecule) -> set[int]:
    """Bond ids whose removal disconnects their endpoints.

    Iterative low-link search that skips only the tree bond it arrived by,
    so parallel bonds protect each other.
    """
    inc, bonds = molecule._inc, molecule._bonds
    disc: dict[str, int] = {}
    low: dict[str, int] = {}
    bridges: set[int] = set()
    t = 0
    for root in molecule.atom_ids():
        if root in disc:
            continue
        disc[root] = low[root] = t
        t += 1
        stack = [(root, -1, iter(sorted(inc[root])))]
        while stack:
            v, via, it = stack[-1]
            advanced = False
            for bid in it:
                if bid == via:
                    continue
                w = bonds[bid].other(v)
                if w in disc:
                    if disc[w] < low[v]:
                        low[v] = disc[w]
                else:
                    disc[w] = low[w] = t
                    t += 1
                    stack.append((w, bid, iter(sorted(inc[w]))))
                    advanced = True
                    break
            if advanced:
                continue
            stack.pop()
            if stack:
                u = stack[-1][0]
                if low[v] < low[u]:
                    low[u] = low[v]
                if low[v] > disc[u]:
                    bridges.add(via)
    return bridges


@dataclass(frozen=True)
class Multiplicity:
    pair: tuple[str, str]
    count: int
    forward: int  # bonds pair[0] -> pair[1]
    backward: int

    @property
    def opposite(self) -> bool:
        return self.forward > 0 and self.backward > 0


def find_multiplicities(molecule: Molecule) -> list[Multiplicity]:
    """Every bonded atom pair with its bond count and per-direction counts, sorted by pair."""
    fw: Counter = Counter()
    bw: Counter = Counter()
    for b in molecule._bonds.values():
        p = b.pair
        if p[0] == b.tail:
            fw[p] += 1
        else:
            bw[p] += 1
    pairs = sorted(set(fw) | set(bw))
    return [Multiplicity(p, fw[p] + bw[p], fw[p], bw[p]) for p in pairs]


@dataclass
class BaseReport:
    is_base: bool
    degree_profile: dict[int, int]
    bond_count: int
    connected: bool

    def __bool__(self) -> bool:
        return self.is_base


def is_base_molecule(molecule: Molecule) -> BaseReport:
    n = len(molecule)
    profile = dict(sorted(Counter(molecule.degree(a) for a in molecule.atom_ids()).items()))
    connected = n > 0 and component_count(molecule) == 1
    rest = n - profile.get(3, 0) - profile.get(2, 0)
    good_profile = rest == profile.get(4, 0) and (
        (profile.get(3, 0) == 2 and profile.get(2, 0) == 0) or (profile.get(2, 0) == 1 and profile.get(3, 0) == 0)
    )
    ok = connected and molecule.bond_count == 2 * n - 1 and good_profile
    return BaseReport(ok, profile, molecule.bond_count, connected)


def validate_molecule(molecule: Molecule, max_multiplicity: int = 3) -> ValidationReport:
    """Degree caps, multiplicity bound and the ban on components where every atom has degree 4."""
    rep = ValidationReport()
    for a in molecule.atom_ids():
        if molecule.in_degree(a) > 2:
            rep.add(a, f"in-degree {molecule.in_degree(a)} exceeds 2")
        if molecule.out_degree(a) > 2:
            rep.add(a, f"out-degree {molecule.out_degree(a)} exceeds 2")
    for m in find_multiplicities(molecule):
        if m.count > max_multiplicity:
            rep.add(f"{m.pair[0]}~{m.pair[1]}", f"{m.count} parallel bonds")
    for comp in full_degree_components(molecule):
        rep.add(comp[0], f"component of {len(comp)} atoms has every atom at degree 4")
    return rep


def full_degree_components(molecule: Molecule) -> list[list[str]]:
    return [c for c in components(molecule) if all(molecule.degree(a) == 4 for a in c)]


# ---------------------------------------------------------------- chains


@dataclass(frozen=True)
class ChainFragment:
    """A molecular chain fragment.

    Type ``"I"`` lists atoms along the chain; type ``"II"`` lists the
    (top, bottom) rung pairs of a ladder.
    """

    kind: str
    atoms: tuple

    def __len__(self) -> int:
        return len(self.atoms)


def _opposite_double(molecule: Molecule, a: str, b: str) -> bool:
    bs = molecule.bonds_between(a, b)
    return len(bs) == 2 and bs[0].tail != bs[1].tail


def detect_chains(molecule: Molecule) -> list[ChainFragment]:
    """Type-I and type-II chain fragments.

    Type I: starts at a degree-2 atom whose two bonds form an
    opposite-direction double bond, then follows opposite double bonds
    through degree-4 atoms as far as they go.

    Type II: maximal ladders of at least two rungs, a rung being a double
    bond, with consecutive rungs joined top-to-top and bottom-to-bottom by
    single bonds running in opposite directions.
    """
    out: list[ChainFragment] = []
    for v in molecule.atom_ids():
        if molecule.degree(v) != 2:
            continue
        nb = molecule.neighbors(v)
        if len(nb) != 1 or not _opposite_double(molecule, v, nb[0]):
            continue
        chain = [v]
        prev, cur = v, nb[0]
        while cur not in chain:
            chain.append(cur)
            if molecule.degree(cur) != 4:
                break
            nxt = [w for w in molecule.neighbors(cur) if w != prev and _opposite_double(molecule, cur, w)]
            if len(nxt) != 1:
                break
            prev, cur = cur, nxt[0]
        if molecule.degree(chain[1]) == 4:
            out.append(ChainFragment("I", tuple(chain)))

    rungs = [m.pair for m in find_multiplicities(molecule) if m.count == 2]
    rung_of = {}
    for r in rungs:
        for a in r:
            rung_of.setdefault(a, []).append(r)

    def single(a, b):
        bs = molecule.bonds_between(a, b)
        return bs[0] if len(bs) == 1 else None

    def link(r, s):
        """Orient rung s against rung r; returns s as (top, bottom) or None."""
        for top, bot in ((s[0], s[1]), (s[1], s[0])):
            x, y = single(r[0], top), single(r[1], bot)
            if x and y and (x.tail == r[0]) != (y.tail == r[1]):
                return (top, bot)
        return None

    adj: dict[tuple, list[tuple]] = {r: [] for r in rungs}
    for r in rungs:
        for s in rungs:
            if r < s and not set(r) & set(s) and link(r, s):
                adj[r].append(s)
                adj[s].append(r)
    done: set[tuple] = set()
    for r in rungs:
        if r in done or not adj[r] or len(adj[r]) > 1:
            continue
        path = [r]
        done.add(r)
        oriented = [r]
        while True:
            nxt = [s for s in adj[path[-1]] if s not in done]
            if len(nxt) != 1:
                break
            s = nxt[0]
            o = link(oriented[-1], s)
            if o is None:
                break
            path.append(s)
            oriented.append(o)
            done.add(s)
        if len(path) >= 2:
            out.append(ChainFragment("II", tuple(oriented)))
    return out


# ---------------------------------------------------------------- JSON


def molecule_to_json(molecule: Molecule, dimension: int = 3) -> dict:
    atoms = []
    for a in molecule.atoms():
        d = {"id": a.id, "degenerate": a.degenerate}
        if a.provenance is not None:
            d["provenance"] = a.provenance
        atoms.append(d)
    return {
        "version": 1,
        "dimension": dimension,
        "atoms": atoms,
        "bonds": [{"id": b.id, "tail": b.tail, "head": b.head, "kind": b.kind.value} for b in molecule.bonds()],
    }


def molecule_from_json(obj) -> tuple[Molecule, int]:
    """Parse a molecule document; returns ``(molecule, dimension)``."""
    if not isinstance(obj, dict) or obj.get("version") != 1:
        raise MoleculeError("unsupported molecule format version")
    try:
        atoms = [Atom(str(a["id"]), bool(a.get("degenerate", False)), a.get("provenance")) for a in obj["atoms"]]
        bonds = sorted(
            (Bond(int(b["id"]), str(b["tail"]), str(b["head"]), BondKind(b.get("kind", "PC"))) for b in obj["bonds"]),
            key=lambda b: b.id,
        )
        dim = int(obj.get("dimension", 3))
    except (KeyError, TypeError, ValueError) as exc:
        raise MoleculeError(f"malformed molecule document: {exc}") from None
    return Molecule(atoms, bonds), dim
