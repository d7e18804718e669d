"""The growing acyclic edge set G over the atoms of the original molecule."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence


class DisjointSet:
    """Union by size with path compression over hashable items."""

    __slots__ = ("parent", "size", "count")

    def __init__(self, items: Iterable = ()):
        self.parent = {}
        self.size = {}
        self.count = 0
        for x in items:
            self.add(x)

    def add(self, x) -> None:
        if x not in self.parent:
            self.parent[x] = x
            self.size[x] = 1
            self.count += 1

    def find(self, x):
        parent = self.parent
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    def union(self, a, b) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        self.count -= 1
        return True

    def copy(self) -> "DisjointSet":
        d = DisjointSet.__new__(DisjointSet)
        d.parent = dict(self.parent)
        d.size = dict(self.size)
        d.count = self.count
        return d


Edge = tuple[str, str, int]  # (tail, head, source bond id)


@dataclass
class ForestState:
    vertices: frozenset
    edges: list[Edge] = field(default_factory=list)
    partition: DisjointSet = field(default_factory=DisjointSet)

    def connected(self, a: str, b: str) -> bool:
        return self.partition.find(a) == self.partition.find(b)

    @property
    def component_count(self) -> int:
        return self.partition.count

    def bond_ids(self) -> set[int]:
        return {e[2] for e in self.edges}

    def pairs(self) -> set[frozenset]:
        return {frozenset(e[:2]) for e in self.edges}

    def copy(self) -> "ForestState":
        return ForestState(self.vertices, list(self.edges), self.partition.copy())


def init_forest(molecule) -> ForestState:
    ids = molecule.atom_ids()
    return ForestState(frozenset(ids), [], DisjointSet(ids))


def add_edge_if_safe(forest: ForestState, tail: str, head: str, bond_id: int) -> bool:
    """Add the edge when its endpoints lie in different components; True when added."""
    if tail not in forest.vertices or head not in forest.vertices:
        raise KeyError(f"edge {tail!r}-{head!r} leaves the vertex set")
    if forest.partition.union(tail, head):
        forest.edges.append((tail, head, bond_id))
        return True
    return False


def add_safe_edges_max(forest: ForestState, candidates: Sequence[Edge]) -> list[Edge]:
    """Greedy pass over ``candidates`` in order; returns the edges that were added.

    By the exchange property of graphic matroids the number added is as
    large as possible, whatever the order.
    """
    return [c for c in candidates if add_edge_if_safe(forest, *c)]


def is_spanning_tree(forest: ForestState) -> bool:
    return forest.component_count <= 1 and len(forest.edges) == max(len(forest.vertices) - 1, 0)
