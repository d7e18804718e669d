"""Signed ternary trees and couples.

A tree node carries a sign and is either a leaf or has exactly three
ordered children whose signs read (s, -s, s).  A couple is a ``+`` rooted
tree, a ``-`` rooted tree and a perfect matching of all leaves in which
every pair joins leaves of opposite sign.

Nodes are addressed by references such as ``"+/0/2"``: the tree tag
(``+`` for the plus tree, ``-`` for the minus tree) followed by child
indices from the root.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator, Optional

PLUS = "+"
MINUS = "-"


class ResourceLimitError(RuntimeError):
    """Raised when an enumeration would exceed its configured cap."""


@dataclass(frozen=True)
class SignedTree:
    """A signed ternary tree; every subtree is itself a SignedTree."""

    sign: int
    children: tuple["SignedTree", ...] = ()
    _hash: int = field(default=0, init=False, repr=False, compare=False)

    def __post_init__(self):
        # trees are used as dict keys a lot; hashing them recursively each time dominates
        object.__setattr__(self, "_hash", hash((self.sign, self.children)))

    def __hash__(self) -> int:
        return self._hash

    @property
    def is_leaf(self) -> bool:
        return not self.children

    def internal_count(self) -> int:
        return _internal_count(self)

    def leaf_count(self) -> int:
        return _leaf_count(self)

    def nodes(self, prefix: tuple[int, ...] = ()) -> Iterator[tuple[tuple[int, ...], "SignedTree"]]:
        """Yield ``(path, node)`` in preorder."""
        stack = [(prefix, self)]
        while stack:
            path, node = stack.pop()
            yield path, node
            for i in range(len(node.children) - 1, -1, -1):
                stack.append((path + (i,), node.children[i]))

    def leaves(self) -> list[tuple[tuple[int, ...], "SignedTree"]]:
        return [(p, n) for p, n in self.nodes() if n.is_leaf]

    def node_at(self, path) -> "SignedTree":
        node = self
        for i in path:
            if not 0 <= i < len(node.children):
                raise KeyError(f"no node at path {tuple(path)}")
            node = node.children[i]
        return node

    def shape_code(self) -> str:
        """Preorder encoding with ``1`` for internal nodes and ``0`` for leaves."""
        return _shape_code(self)


@lru_cache(maxsize=None)
def _internal_count(t: SignedTree) -> int:
    return 0 if t.is_leaf else 1 + sum(_internal_count(c) for c in t.children)


@lru_cache(maxsize=None)
def _leaf_count(t: SignedTree) -> int:
    return 1 if t.is_leaf else sum(_leaf_count(c) for c in t.children)


@lru_cache(maxsize=None)
def _shape_code(t: SignedTree) -> str:
    if t.is_leaf:
        return "0"
    return "1" + "".join(_shape_code(c) for c in t.children)


def leaf(sign: int) -> SignedTree:
    return SignedTree(sign)


def node(sign: int, *children: SignedTree) -> SignedTree:
    return SignedTree(sign, tuple(children))


def expanded(sign: int) -> SignedTree:
    """One internal node of the given sign with three correctly signed leaves."""
    return SignedTree(sign, (SignedTree(sign), SignedTree(-sign), SignedTree(sign)))


def make_ref(tag: str, path) -> str:
    return "/".join([tag, *map(str, path)])


def parse_ref(ref: str) -> tuple[str, tuple[int, ...]]:
    parts = ref.split("/")
    if parts[0] not in (PLUS, MINUS):
        raise ValueError(f"bad node reference {ref!r}")
    try:
        return parts[0], tuple(int(p) for p in parts[1:])
    except ValueError:
        raise ValueError(f"bad node reference {ref!r}") from None


def parent_ref(ref: str) -> Optional[str]:
    cut = ref.rfind("/")
    return None if cut < 0 else ref[:cut]


def sign_char(sign: int) -> str:
    return PLUS if sign > 0 else MINUS


@dataclass
class ValidationReport:
    violations: list[tuple[str, str]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, where: str, message: str) -> None:
        self.violations.append((where, message))

    def __bool__(self) -> bool:
        return self.ok


def validate_tree(tree: SignedTree, tag: str = PLUS) -> ValidationReport:
    """Check arity and the (s, -s, s) child-sign rule at every internal node."""
    report = ValidationReport()
    for path, nd in tree.nodes():
        if nd.sign not in (1, -1):
            report.add(make_ref(tag, path), f"sign must be +1 or -1, got {nd.sign!r}")
            continue
        if nd.is_leaf:
            continue
        if len(nd.children) != 3:
            report.add(make_ref(tag, path), f"internal node has {len(nd.children)} children, expected 3")
            continue
        want = (nd.sign, -nd.sign, nd.sign)
        for i, (child, s) in enumerate(zip(nd.children, want)):
            if child.sign != s:
                report.add(make_ref(tag, path + (i,)), f"child {i} has sign {sign_char(child.sign)}, expected {sign_char(s)}")
    return report


def leaf_sign_balance(tree: SignedTree) -> int:
    """Number of + leaves minus number of - leaves."""
    return sum(n.sign for _, n in tree.leaves())


@dataclass(frozen=True)
class Couple:
    """Two signed trees plus a leaf pairing.

    ``pairing`` holds each pair as a sorted tuple of leaf references; the
    constructor normalises order so equal couples compare equal.
    """

    plus: SignedTree
    minus: SignedTree
    pairing: tuple[tuple[str, str], ...]

    def __post_init__(self):
        norm = tuple(sorted(tuple(sorted(p)) for p in self.pairing))
        object.__setattr__(self, "pairing", norm)

    def tree(self, tag: str) -> SignedTree:
        if tag == PLUS:
            return self.plus
        if tag == MINUS:
            return self.minus
        raise KeyError(tag)

    def node(self, ref: str) -> SignedTree:
        tag, path = parse_ref(ref)
        return self.tree(tag).node_at(path)

    def leaf_refs(self) -> list[str]:
        out = [make_ref(PLUS, p) for p, _ in self.plus.leaves()]
        out += [make_ref(MINUS, p) for p, _ in self.minus.leaves()]
        return out

    def internal_refs(self) -> list[str]:
        out = [make_ref(PLUS, p) for p, n in self.plus.nodes() if not n.is_leaf]
        out += [make_ref(MINUS, p) for p, n in self.minus.nodes() if not n.is_leaf]
        return out

    def internal_count(self) -> int:
        return self.plus.internal_count() + self.minus.internal_count()


def validate_couple(couple: Couple) -> ValidationReport:
    """Check root signs, tree validity and that the pairing is a sign-opposite perfect matching."""
    report = ValidationReport()
    if couple.plus.sign != 1:
        report.add(PLUS, "plus tree root must have sign +")
    if couple.minus.sign != -1:
        report.add(MINUS, "minus tree root must have sign -")
    for tag in (PLUS, MINUS):
        report.violations.extend(validate_tree(couple.tree(tag), tag).violations)

    leaves = set(couple.leaf_refs())
    seen: dict[str, int] = {}
    for a, b in couple.pairing:
        for ref in (a, b):
            if ref not in leaves:
                report.add(ref, "pairing references a node that is not a leaf")
            seen[ref] = seen.get(ref, 0) + 1
        if a in leaves and b in leaves and couple.node(a).sign == couple.node(b).sign:
            report.add(f"{a}~{b}", "paired leaves have the same sign")
    for ref, k in sorted(seen.items()):
        if k > 1:
            report.add(ref, f"leaf matched {k} times")
    for ref in sorted(leaves - set(seen)):
        report.add(ref, "leaf is unmatched")
    return report


def sibling_pairs(couple: Couple) -> list[tuple[str, str]]:
    """Pairs joining two leaves of the same parent.

    Such a pair would put both ends of its bond on one atom, a self-loop,
    so these couples have no molecule.
    """
    return [(a, b) for a, b in couple.pairing if parent_ref(a) == parent_ref(b)]


# ---------------------------------------------------------------- enumeration


@lru_cache(maxsize=None)
def trees_with(internal: int, sign: int) -> tuple[SignedTree, ...]:
    """All valid trees with ``internal`` internal nodes and the given root sign, sorted by shape code."""
    if internal == 0:
        return (SignedTree(sign),)
    out = []
    for a in range(internal):
        for b in range(internal - a):
            c = internal - 1 - a - b
            for x in trees_with(a, sign):
                for y in trees_with(b, -sign):
                    for z in trees_with(c, sign):
                        out.append(SignedTree(sign, (x, y, z)))
    out.sort(key=SignedTree.shape_code)
    return tuple(out)


@lru_cache(maxsize=4096)
def _leaf_table(tree: SignedTree, tag: str):
    """(+ leaves, - leaves) as lists of (ref, parent ref), in path order."""
    plus, minus = [], []
    for path, nd in tree.nodes():
        if nd.is_leaf:
            ref = make_ref(tag, path)
            (plus if nd.sign > 0 else minus).append((ref, parent_ref(ref)))
    return plus, minus


def _matchings(pos, neg):
    """Sibling-free perfect matchings of + leaves to - leaves, lexicographic in partner order."""
    n = len(pos)
    used = [False] * n
    chosen: list[tuple[str, str]] = []

    def rec(i):
        if i == n:
            yield tuple(chosen)
            return
        ref, par = pos[i]
        for j in range(n):
            if used[j] or neg[j][1] == par:
                continue
            used[j] = True
            chosen.append((ref, neg[j][0]))
            yield from rec(i + 1)
            chosen.pop()
            used[j] = False

    return rec(0)


def _sorted_leaves(couple_plus: SignedTree, couple_minus: SignedTree):
    pp, pm = _leaf_table(couple_plus, PLUS)
    mp, mm = _leaf_table(couple_minus, MINUS)
    pos = sorted(pp + mp)
    neg = sorted(pm + mm)
    return pos, neg


def enumerate_couples(max_internal_nodes: int, limit: Optional[int] = 2_000_000) -> Iterator[Couple]:
    """Yield every sibling-free couple with at most ``max_internal_nodes`` internal nodes in total.

    Order: by total internal count, then plus-tree internal count, then the
    shape codes of the plus and minus trees, then matchings in lexicographic
    order of the partners assigned to the sorted + leaves.  Raises
    ResourceLimitError once more than ``limit`` couples would be produced.
    """
    if max_internal_nodes < 1:
        raise ValueError("max_internal_nodes must be >= 1")
    count = 0
    for total in range(2, max_internal_nodes + 1):
        for a in range(1, total):
            for tp in trees_with(a, 1):
                for tm in trees_with(total - a, -1):
                    pos, neg = _sorted_leaves(tp, tm)
                    for m in _matchings(pos, neg):
                        count += 1
                        if limit is not None and count > limit:
                            raise ResourceLimitError(f"more than {limit} couples")
                        yield Couple(tp, tm, m)


def _grow(n: int, sign: int, rng: random.Random) -> SignedTree:
    """Expand uniformly chosen leaves until ``n`` internal nodes exist."""
    # mutable representation: node = [sign, children-list]
    root = [sign, []]
    leaves = [root]
    for _ in range(n):
        nd = leaves.pop(rng.randrange(len(leaves)))
        s = nd[0]
        nd[1] = [[s, []], [-s, []], [s, []]]
        leaves.extend(nd[1])

    def freeze(x):
        return SignedTree(x[0], tuple(freeze(c) for c in x[1]))

    return freeze(root)


def random_couple(n_plus: int, n_minus: int, seed: int, max_tries: int = 1000) -> Couple:
    """Draw a sibling-free couple with the requested internal-node counts.

    Each tree grows by expanding a uniformly chosen leaf.  The matching is
    built greedily: + leaves in shuffled order each take a uniformly chosen
    free non-sibling - leaf.  A dead end redraws the matching.  Neither
    shapes nor matchings are uniform; only determinism per seed is promised.
    """
    if n_plus < 1 or n_minus < 1:
        raise ValueError("both trees need at least one internal node")
    rng = random.Random(seed)
    tp = _grow(n_plus, 1, rng)
    tm = _grow(n_minus, -1, rng)
    pos, neg = _sorted_leaves(tp, tm)
    for _ in range(max_tries):
        order = list(range(len(pos)))
        rng.shuffle(order)
        free = list(range(len(neg)))
        pairs = []
        for i in order:
            ref, par = pos[i]
            options = [j for j in free if neg[j][1] != par]
            if not options:
                break
            j = rng.choice(options)
            free.remove(j)
            pairs.append((ref, neg[j][0]))
        else:
            return Couple(tp, tm, tuple(pairs))
    raise RuntimeError("could not draw a sibling-free matching")  # pragma: no cover


# ---------------------------------------------------------------- JSON


def tree_to_json(tree: SignedTree) -> dict:
    out = {"sign": sign_char(tree.sign)}
    if tree.children:
        out["children"] = [tree_to_json(c) for c in tree.children]
    return out


def tree_from_json(obj) -> SignedTree:
    if not isinstance(obj, dict) or obj.get("sign") not in (PLUS, MINUS):
        raise ValueError(f"bad tree node: {obj!r}")
    sign = 1 if obj["sign"] == PLUS else -1
    kids = obj.get("children", [])
    if not isinstance(kids, list):
        raise ValueError("children must be a list")
    return SignedTree(sign, tuple(tree_from_json(c) for c in kids))


def couple_to_json(couple: Couple) -> dict:
    return {
        "version": 1,
        "plus": tree_to_json(couple.plus),
        "minus": tree_to_json(couple.minus),
        "pairing": [list(p) for p in couple.pairing],
    }


def couple_from_json(obj) -> Couple:
    if not isinstance(obj, dict) or obj.get("version") != 1:
        raise ValueError("unsupported couple format version")
    pairs = obj.get("pairing")
    if not isinstance(pairs, list) or not all(isinstance(p, list) and len(p) == 2 for p in pairs):
        raise ValueError("pairing must be a list of two-element lists")
    return Couple(tree_from_json(obj["plus"]), tree_from_json(obj["minus"]), tuple(tuple(p) for p in pairs))
