"""Weighted graphs with Kruskal, Prim and a brute-force minimum spanning tree."""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .forest import DisjointSet
from .verify import brute_force_spanning_trees, SizeLimitError


class DisconnectedGraphError(ValueError):
    pass


@dataclass(frozen=True)
class WeightedGraph:
    vertices: tuple
    edges: tuple  # (u, v, Fraction) in input order

    def __post_init__(self):
        vs = set(self.vertices)
        for u, v, _ in self.edges:
            if u == v:
                raise ValueError(f"self-loop on {u!r}")
            if u not in vs or v not in vs:
                raise ValueError(f"edge {u!r}-{v!r} uses an unknown vertex")

    @classmethod
    def build(cls, vertices, edges) -> "WeightedGraph":
        return cls(tuple(vertices), tuple((u, v, Fraction(w)) for u, v, w in edges))


def total_weight(edges) -> Fraction:
    return sum((Fraction(e[2]) for e in edges), Fraction(0))


def kruskal(g: WeightedGraph) -> list[tuple]:
    """Edges of a minimum spanning tree in selection order; ties go to the earlier input edge."""
    dsu = DisjointSet(g.vertices)
    order = sorted(range(len(g.edges)), key=lambda i: (g.edges[i][2], i))
    out = []
    for i in order:
        u, v, _ = g.edges[i]
        if dsu.union(u, v):
            out.append(g.edges[i])
            if len(out) == len(g.vertices) - 1:
                break
    if len(out) != max(len(g.vertices) - 1, 0):
        raise DisconnectedGraphError("graph is not connected")
    return out


def prim(g: WeightedGraph, root) -> list[tuple]:
    """Edges of a minimum spanning tree grown from ``root``, in selection order."""
    if root not in g.vertices:
        raise KeyError(f"unknown root {root!r}")
    inc: dict = {v: [] for v in g.vertices}
    for i, (u, v, w) in enumerate(g.edges):
        inc[u].append(i)
        inc[v].append(i)
    inside = {root}
    heap = [(g.edges[i][2], i) for i in inc[root]]
    heapq.heapify(heap)
    out = []
    while heap and len(inside) < len(g.vertices):
        _, i = heapq.heappop(heap)
        u, v, _ = g.edges[i]
        new = v if u in inside else u
        if new in inside:
            continue
        inside.add(new)
        out.append(g.edges[i])
        for j in inc[new]:
            a, b, w = g.edges[j]
            if a not in inside or b not in inside:
                heapq.heappush(heap, (w, j))
    if len(inside) != len(g.vertices):
        raise DisconnectedGraphError("graph is not connected")
    return out


def brute_force_mst(g: WeightedGraph) -> Fraction:
    """Smallest total weight over every spanning tree."""
    if len(g.vertices) > 8:
        raise SizeLimitError("brute-force MST is limited to 8 vertices")
    trees = brute_force_spanning_trees(g.vertices, [e[:2] for e in g.edges])
    if not trees and len(g.vertices) > 1:
        raise DisconnectedGraphError("graph is not connected")
    if not trees:
        return Fraction(0)
    return min(sum((g.edges[i][2] for i in t), Fraction(0)) for t in trees)


def graph_to_json(g: WeightedGraph) -> dict:
    return {
        "version": 1,
        "vertices": list(g.vertices),
        "edges": [[u, v, f"{w.numerator}/{w.denominator}" if w.denominator != 1 else str(w.numerator)] for u, v, w in g.edges],
    }


def graph_from_json(obj) -> WeightedGraph:
    if not isinstance(obj, dict) or obj.get("version") != 1:
        raise ValueError("unsupported graph format version")
    try:
        return WeightedGraph.build(obj["vertices"], [(u, v, Fraction(w)) for u, v, w in obj["edges"]])
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"malformed graph document: {exc}") from None
