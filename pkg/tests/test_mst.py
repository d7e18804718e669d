import random
from fractions import Fraction

import pytest

from molred.io import fixture_dir, read_json
from molred.mst import (
    DisconnectedGraphError,
    WeightedGraph,
    brute_force_mst,
    graph_from_json,
    graph_to_json,
    kruskal,
    prim,
    total_weight,
)
from molred.verify import SizeLimitError


@pytest.fixture(scope="module")
def intro():
    return graph_from_json(read_json(fixture_dir() / "intro-graph.json"))


def names(edges):
    return ["".join(e[:2]) for e in edges]


def test_kruskal_intro_order(intro):
    assert names(kruskal(intro)) == ["CE", "AB", "BC", "BD"]


def test_kruskal_intro_weight(intro):
    assert total_weight(kruskal(intro)) == 11


def test_kruskal_single_vertex():
    assert kruskal(WeightedGraph.build(["A"], [])) == []


def test_prim_intro_order(intro):
    assert names(prim(intro, "A")) == ["AB", "BC", "CE", "BD"]


def test_prim_and_kruskal_sets_agree(intro):
    as_set = lambda es: {frozenset(e[:2]) for e in es}
    assert as_set(prim(intro, "A")) == as_set(kruskal(intro))


def test_prim_two_vertices():
    g = WeightedGraph.build("AB", [("A", "B", 4)])
    assert prim(g, "A") == [("A", "B", Fraction(4))]


def test_prim_unknown_root(intro):
    with pytest.raises(KeyError):
        prim(intro, "Z")


def test_disconnected():
    g = WeightedGraph.build("ABC", [("A", "B", 1)])
    with pytest.raises(DisconnectedGraphError):
        kruskal(g)
    with pytest.raises(DisconnectedGraphError):
        prim(g, "A")
    with pytest.raises(DisconnectedGraphError):
        brute_force_mst(g)


def test_brute_force_examples(intro):
    assert brute_force_mst(intro) == 11
    assert brute_force_mst(WeightedGraph.build("abc", [("a", "b", 1), ("b", "c", 2), ("a", "c", 3)])) == 3
    tree = WeightedGraph.build("abcd", [("a", "b", 2), ("b", "c", Fraction(1, 3)), ("b", "d", 5)])
    assert brute_force_mst(tree) == Fraction(22, 3)


def test_brute_force_size_limit():
    with pytest.raises(SizeLimitError):
        brute_force_mst(WeightedGraph.build(range(9), []))


def test_ties_go_to_earlier_edge():
    g = WeightedGraph.build("abc", [("a", "b", 1), ("b", "c", 1), ("a", "c", 1)])
    assert names(kruskal(g)) == ["ab", "bc"]
    assert names(prim(g, "a")) == ["ab", "bc"]


def test_self_loop_rejected():
    with pytest.raises(ValueError):
        WeightedGraph.build("a", [("a", "a", 1)])


def test_unknown_vertex_rejected():
    with pytest.raises(ValueError):
        WeightedGraph.build("a", [("a", "b", 1)])


def random_graph(rng, n, m, distinct=False):
    vs = [f"v{i}" for i in range(n)]
    edges = []
    order = vs[:]
    rng.shuffle(order)
    for i in range(1, n):  # a random spanning tree keeps it connected
        edges.append((order[i], order[rng.randrange(i)]))
    while len(edges) < m:
        a, b = rng.sample(vs, 2)
        edges.append((a, b))
    if distinct:
        ws = rng.sample(range(1, 10 * len(edges) + 1), len(edges))
        weights = [Fraction(w, 7) for w in ws]
    else:
        weights = [Fraction(rng.randint(1, 20), rng.randint(1, 5)) for _ in edges]
    return WeightedGraph.build(vs, [(a, b, w) for (a, b), w in zip(edges, weights)])


def test_random_weights_agree():
    rng = random.Random(8)
    for _ in range(200):
        n = rng.randint(1, 8)
        g = random_graph(rng, n, rng.randint(max(n - 1, 0), min(16, n * (n - 1) // 2 + 3) if n > 1 else 0))
        w = total_weight(kruskal(g))
        assert w == brute_force_mst(g)
        for root in g.vertices:
            assert total_weight(prim(g, root)) == w


def test_distinct_weights_unique_tree():
    rng = random.Random(9)
    for _ in range(100):
        n = rng.randint(2, 8)
        g = random_graph(rng, n, rng.randint(n - 1, 14), distinct=True)
        k = {frozenset(e[:2]) for e in kruskal(g)}
        ws = [e[2] for e in g.edges]
        assert len(set(ws)) == len(ws)
        # with parallel edges a pair may appear twice, so compare the chosen edges themselves
        assert sorted(kruskal(g), key=lambda e: e[2]) == sorted(prim(g, g.vertices[0]), key=lambda e: e[2])
        assert len(k) == n - 1


def test_json_round_trip(intro):
    assert graph_from_json(graph_to_json(intro)) == intro
    g = WeightedGraph.build("ab", [("a", "b", Fraction(3, 7))])
    assert graph_to_json(g)["edges"] == [["a", "b", "3/7"]]
    assert graph_from_json(graph_to_json(g)) == g


def test_json_rejects_bad_documents():
    with pytest.raises(ValueError):
        graph_from_json({"version": 2})
    with pytest.raises(ValueError):
        graph_from_json({"version": 1, "vertices": ["a"], "edges": [["a", "b", "1"]]})
    with pytest.raises(ValueError):
        graph_from_json({"version": 1, "vertices": ["a", "b"], "edges": [["a", "b", "1/0"]]})
