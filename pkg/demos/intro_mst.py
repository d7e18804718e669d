"""Kruskal and Prim on the five-vertex introductory graph, checked by brute force."""

from molred.io import fixture_dir, read_json
from molred.mst import brute_force_mst, graph_from_json, kruskal, prim, total_weight
from molred.verify import multiple_components_witness

g = graph_from_json(read_json(fixture_dir() / "intro-graph.json"))
k = kruskal(g)
p = prim(g, "A")
print("kruskal:", " ".join(a + b for a, b, _ in k), "weight", total_weight(k))
print("prim   :", " ".join(a + b for a, b, _ in p), "weight", total_weight(p))
print("brute force minimum:", brute_force_mst(g))
# Kruskal grows a forest; Prim always keeps a single tree
print("kruskal has two non-trivial pieces after edge", multiple_components_witness([[e[:2]] for e in k]))
print("prim ever splits:", multiple_components_witness([[e[:2]] for e in p]))
