"""Acceptance suite: one PASS/FAIL line per criterion, all tolerances exact.

Criteria 3 to 7 share one corpus (every couple with at most six internal
nodes, plus 500 seeded random couples with at most twenty) and one
verification pass over its traces.  Building it takes a few minutes.
"""

import random
import time
from fractions import Fraction

import pytest

import corpus
from conftest import ACCEPTANCE_LINES
from molred.forest import is_spanning_tree
from molred.io import fixture_dir, load_fixture, read_json
from molred.molecule import find_multiplicities, is_base_molecule, molecule_from_couple, same_labeled_graph
from molred.mst import WeightedGraph, brute_force_mst, graph_from_json, kruskal, prim, total_weight
from molred.reduction import StepKind, ledger_check, parse_script, run_scripted
from molred.verify import brute_force_spanning_trees, underlying_graph, verify_trace

D = 3
GOOD_GAP = Fraction(1, 6 * (D - 1))


def report(n, ok, detail, seconds, limit):
    timely = seconds < limit
    status = "PASS" if ok and timely else "FAIL"
    line = f"{status} criterion {n}: {detail} [exact; {seconds:.2f}s, limit {limit:g}s]"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line
    assert timely, line


class Tally:
    """Counters for criteria 3 to 7, filled by one streaming pass over the corpus."""

    def __init__(self):
        self.seconds = {n: 0.0 for n in (3, 4, 5, 6, 7)}
        self.couples = self.molecules = self.runs = self.traces = 0
        self.errors, self.unverified = [], []
        self.steps = self.ledger_bad = 0
        self.classes = {"normal": 0, "good": 0}
        self.ledger_first = None
        self.rejections = self.injected = 0
        self.invariant_bad = []
        self.dsu_vs_dfs = []
        self.small = self.outside = 0
        self.not_base = []
        self.tree_cache = {}


def _time(tally, n, fn, *args):
    start = time.perf_counter()
    out = fn(*args)
    tally.seconds[n] += time.perf_counter() - start
    return out


def _ledger(t, source, tr):
    lr = ledger_check(tr, D)
    t.steps += len(tr.records)
    for r, cls in zip(tr.records, lr.classes):
        gap = Fraction(r.delta_gamma) - r.delta_chi_computed
        # independent restatement of the normal-or-good rule
        mine = "normal" if gap == 0 else "good" if gap >= GOOD_GAP else None
        if mine is None or mine != cls:
            t.ledger_bad += 1
            t.ledger_first = t.ledger_first or (source, r.index, r.kind.value)
        else:
            t.classes[mine] += 1
    if not lr.ok:
        t.ledger_bad += len(lr.violations)
        t.ledger_first = t.ledger_first or (source, lr.violations[0])


def _invariants(t, source, tr, rep):
    if not (rep.maximality_ok and rep.injected_ok):
        t.invariant_bad.append((source, rep.failures[:1]))
    for r in tr.records:
        t.injected += len(r.bonds_injected)
        t.rejections += len(r.g_edges_rejected)
        if {b.id for b in r.bonds_injected} & set(r.g_edges_added):
            t.invariant_bad.append((source, r.index, "injected bond in G"))


def _oracle(t, source, molecule, trees, tr, rep):
    # the verifier replays each step with a search-based forest and compares it with the recorded DSU answers
    if not (rep.maximality_ok and rep.spanning_tree_ok):
        t.dsu_vs_dfs.append(source)
    if trees is not None:
        vs, pairs = underlying_graph(molecule)
        g = frozenset(pairs.index(tuple(sorted(x[:2]))) for x in tr.forest.edges)
        t.small += 1
        if g not in trees:
            t.outside += 1


def _small_trees(t, molecule):
    """Brute-force spanning trees of the simple graph, or None above ten atoms.

    Cached by the graph relabelled to vertex positions; the edge order is
    kept, so cached edge-index sets apply unchanged.
    """
    if len(molecule) > 10:
        return None
    vs, pairs = underlying_graph(molecule)
    pos = {v: i for i, v in enumerate(vs)}
    key = (len(vs), tuple((pos[a], pos[b]) for a, b in pairs))
    if key not in t.tree_cache:
        t.tree_cache[key] = set(brute_force_spanning_trees(range(len(vs)), key[1]))
    return t.tree_cache[key]


def _base(t, source, molecule):
    rep = is_base_molecule(molecule)
    if not (rep.is_base and all(x.count <= 3 for x in find_multiplicities(molecule))):
        t.not_base.append(source)


@pytest.fixture(scope="module")
def tally():
    t = Tally()
    counter = {}
    stream = corpus.iter_molecules(counter)
    while True:
        start = time.perf_counter()
        item = next(stream, None)
        if item is None:
            t.seconds[3] += time.perf_counter() - start
            break
        source, m = item
        entry = corpus.reduce_all_policies(m, source)
        t.seconds[3] += time.perf_counter() - start
        t.molecules += 1
        _time(t, 7, _base, t, source, m)
        if entry.error:
            t.errors.append(entry.error)
            continue
        t.runs += len(entry.policy_trace)
        trees = _time(t, 6, _small_trees, t, m)
        for tr in entry.traces:
            t.traces += 1
            rep = _time(t, 3, verify_trace, m, tr, D)
            if not rep.ok:
                t.unverified.append((source, rep.failures[:2]))
            _time(t, 4, _ledger, t, source, tr)
            _time(t, 5, _invariants, t, source, tr, rep)
            _time(t, 6, _oracle, t, source, m, trees, tr, rep)
    t.couples = counter["couples"]
    return t


# ------------------------------------------------------------ 1


def test_criterion_1_intro_mst():
    start = time.perf_counter()
    g = graph_from_json(read_json(fixture_dir() / "intro-graph.json"))
    k, p = kruskal(g), prim(g, "A")
    names = lambda es: ["".join(e[:2]) for e in es]
    as_set = lambda es: {frozenset(e[:2]) for e in es}
    checks = {
        "kruskal order CE AB BC BD": names(k) == ["CE", "AB", "BC", "BD"],
        "prim order AB BC CE BD": names(p) == ["AB", "BC", "CE", "BD"],
        "same edge set": as_set(k) == as_set(p),
        "weight 11 = oracle": total_weight(k) == total_weight(p) == brute_force_mst(g) == 11,
    }
    bad = [name for name, ok in checks.items() if not ok]
    report(1, not bad, "intro MST " + ("ok" if not bad else f"failed: {bad}"), time.perf_counter() - start, 1)


# ------------------------------------------------------------ 2

EXPECTED_STEPS = [
    ("3R-1", {"1t"}),
    ("BR", {"1b", "-1b"}),
    ("BR", {"-4b", "-4t"}),
    ("3S3-5G", {"-1t", "-4t"}),
    ("3S3-5G", {"-1b", "-4b"}),
    ("3D4G", {"2t", "3t"}),
    ("BR", {"3b", "2b"}),
    ("2R-1", {"3b"}),
    ("BR", {"+1t", "4t"}),
    ("BR", {"4t", "4b"}),
    ("BR", {"4b", "+1b"}),
    ("BR", {"+4b", "+4t"}),
    ("BR", {"1b", "2b"}),
    ("3S3-5G", {"+1t", "+4t"}),
    ("3S3-5G", {"+1b", "+4b"}),
]


def test_criterion_2_worked_example():
    start = time.perf_counter()
    fx = load_fixture()
    m = molecule_from_couple(fx.couple, names=fx.names)
    tr = run_scripted(fx.molecule, parse_script(fx.script, fx.molecule))
    tail = tr.records[15:]
    checks = {
        "24 atoms / 47 bonds": len(m) == 24 and m.bond_count == 47,
        "labeled equality": same_labeled_graph(m, fx.molecule),
        "base molecule": is_base_molecule(m).is_base,
        "scripted kinds and anchors": [(r.kind.value, set(r.anchor)) for r in tr.records[:15]] == EXPECTED_STEPS,
        "four 2R-5 adding nothing": [r.kind for r in tail] == [StepKind.R2_5] * 4 and all(not r.g_edges_added for r in tail),
        "23 edges, tree": len(tr.forest.edges) == 23 and is_spanning_tree(tr.forest),
        "final red set": tr.forest.pairs() == {frozenset(e) for e in fx.expected_edges},
        "trace verifies": verify_trace(fx.molecule, tr, d=D).ok,
    }
    bad = [name for name, ok in checks.items() if not ok]
    report(2, not bad, "worked example " + ("ok" if not bad else f"failed: {bad}"), time.perf_counter() - start, 1)


# ------------------------------------------------------------ 3


def test_criterion_3_spanning_tree_suite(tally):
    t = tally
    detail = (
        f"{t.couples} couples, {t.molecules} distinct molecules, {t.runs} policy runs "
        f"({t.traces} distinct traces); errors {len(t.errors)}, unverified {len(t.unverified)}"
    )
    if t.errors or t.unverified:
        detail += f"; first: {(t.errors or t.unverified)[0]}"
    ok = not t.errors and not t.unverified and t.runs == len(corpus.POLICIES) * t.molecules
    report(3, ok, detail, t.seconds[3], 300)


def test_criterion_4_ledger(tally):
    t = tally
    detail = f"{t.steps} steps, {t.classes['normal']} normal, {t.classes['good']} good, {t.ledger_bad} violations"
    if t.ledger_first:
        detail += f"; first: {t.ledger_first}"
    report(4, t.ledger_bad == 0, detail, t.seconds[4], 300)


def test_criterion_5_maximality_and_injected(tally):
    t = tally
    detail = f"{t.traces} traces, {t.rejections} rejections, {t.injected} injected bonds, {len(t.invariant_bad)} violations"
    report(5, not t.invariant_bad, detail, t.seconds[5], 300)


def _random_graph(rng):
    n = rng.randint(1, 8)
    vs = [f"v{i}" for i in range(n)]
    order = vs[:]
    rng.shuffle(order)
    pairs = [(order[i], order[rng.randrange(i)]) for i in range(1, n)]
    for _ in range(rng.randint(0, 16 - len(pairs)) if n > 1 else 0):
        pairs.append(tuple(rng.sample(vs, 2)))
    return WeightedGraph.build(vs, [(a, b, Fraction(rng.randint(1, 30), rng.randint(1, 6))) for a, b in pairs])


def test_criterion_6_oracles(tally):
    t = tally
    start = time.perf_counter()
    rng = random.Random(6)
    mst_bad = sum(total_weight(kruskal(g)) != brute_force_mst(g) for g in (_random_graph(rng) for _ in range(200)))
    seconds = t.seconds[6] + time.perf_counter() - start
    detail = (
        f"DSU/DFS mismatches {len(t.dsu_vs_dfs)}; G outside brute-force trees {t.outside}/{t.small} "
        f"({len(t.tree_cache)} distinct graph shapes); "
        f"kruskal != oracle {mst_bad}/200"
    )
    report(6, not t.dsu_vs_dfs and not t.outside and not mst_bad, detail, seconds, 120)


def test_criterion_7_base_molecules(tally):
    t = tally
    detail = f"{t.molecules} molecules, {len(t.not_base)} not base" + (f"; first: {t.not_base[0]}" if t.not_base else "")
    report(7, not t.not_base, detail, t.seconds[7], 300)
