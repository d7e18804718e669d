import pytest

from molred.couple import Couple, SignedTree, enumerate_couples, expanded, leaf, node, random_couple
from molred.io import load_fixture
from molred.molecule import (
    Atom,
    Bond,
    BondKind,
    Molecule,
    MoleculeError,
    components,
    degree,
    detect_chains,
    euler_characteristic,
    find_bridges,
    find_multiplicities,
    is_base_molecule,
    molecule_from_couple,
    molecule_from_json,
    molecule_key,
    molecule_to_json,
    same_labeled_graph,
    validate_molecule,
)
from molred.reduction import parse_script, run_scripted

P, M = 1, -1


def minimal():
    c = Couple(expanded(P), expanded(M), (("+/1", "-/1"), ("+/0", "-/0"), ("+/2", "-/2")))
    return molecule_from_couple(c)


def build(atoms, edges):
    m = Molecule(Atom(a) for a in atoms)
    for t, h in edges:
        m.add_bond(t, h)
    return m


@pytest.fixture(scope="module")
def fx():
    return load_fixture()


def after_script(fx, k):
    steps = parse_script(fx.script, fx.molecule)
    return run_scripted(fx.molecule, steps[:k], complete=False).molecule


# ------------------------------------------------------------ construction


def test_minimal_molecule_is_triple_bond():
    m = minimal()
    assert len(m) == 2 and m.bond_count == 3
    assert len({b.pair for b in m.bonds()}) == 1
    ins_outs = sorted((m.out_degree(a), m.in_degree(a)) for a in m.atom_ids())
    assert ins_outs == [(1, 2), (2, 1)]
    assert {b.kind for b in m.bonds()} == {BondKind.LP}


def _three_three_couple():
    # the small 3+3 example couple with the sign rule restored in the middle subtrees
    plus = SignedTree(P, (expanded(P), node(M, leaf(M), leaf(P), leaf(M)), leaf(P)))
    minus = SignedTree(M, (expanded(M), node(P, leaf(P), leaf(M), leaf(P)), leaf(M)))
    pairs = tuple((f"+/{i}/{j}", f"-/{i}/{j}") for i in (0, 1) for j in range(3)) + (("+/2", "-/2"),)
    return Couple(plus, minus, pairs)


def test_three_three_couple_molecule():
    names = {"+": "T4", "+/0": "T1", "+/1": "T2", "-": "B4", "-/0": "B1", "-/1": "B2"}
    m = molecule_from_couple(_three_three_couple(), names=names)
    assert len(m) == 6 and m.bond_count == 11
    assert m.multiplicity("T1", "B1") == 3
    assert m.multiplicity("T2", "B2") == 3
    (gray,) = m.bonds_between("B4", "T4")
    assert (gray.tail, gray.head) == ("B4", "T4")
    # parent-child bonds
    assert {(b.tail, b.head) for b in m.bonds() if b.kind is BondKind.PC} == {
        ("T1", "T4"),
        ("T4", "T2"),
        ("B4", "B1"),
        ("B2", "B4"),
    }
    assert is_base_molecule(m)


def test_fixture_regenerates_molecule(fx):
    m = molecule_from_couple(fx.couple, names=fx.names)
    assert len(m) == 24 and m.bond_count == 47
    assert same_labeled_graph(m, fx.molecule)


def test_invalid_couple_rejected():
    bad = Couple(expanded(P), expanded(M), (("+/0", "-/1"), ("+/1", "-/0"), ("+/2", "-/2")))
    with pytest.raises(MoleculeError):
        molecule_from_couple(bad)


def test_sibling_pair_rejected():
    c = Couple(expanded(P), expanded(M), (("+/0", "+/1"), ("+/2", "-/0"), ("-/1", "-/2")))
    with pytest.raises(MoleculeError, match="sibling"):
        molecule_from_couple(c)


def test_key_determines_molecule():
    by_key = {}
    for c in enumerate_couples(4):
        m = molecule_from_couple(c)
        k = molecule_key(c)
        if k in by_key:
            assert by_key[k].signature() == m.signature()
        else:
            by_key[k] = m
    assert len(by_key) < sum(1 for _ in enumerate_couples(4))


# ------------------------------------------------------------ degree / chi


def test_degree_examples(fx):
    m = build(["a"], [])
    assert degree(m, "a") == 0
    mm = minimal()
    assert all(degree(mm, a) == 3 for a in mm.atom_ids())
    assert degree(fx.molecule, "4b") == 4
    with pytest.raises(KeyError):
        degree(mm, "nope")


def test_euler_examples():
    assert euler_characteristic(Molecule()) == 0
    assert euler_characteristic(minimal()) == 2
    shell = build("ABCDE", [("A", "B"), ("B", "C"), ("A", "D"), ("B", "D"), ("B", "E"), ("C", "E"), ("D", "E")])
    assert euler_characteristic(shell) == 3


def test_euler_counts_isolated_atoms():
    m = build("abc", [("a", "b")])
    assert euler_characteristic(m) == 1 - 3 + 2


# ------------------------------------------------------------ base molecules


def test_base_examples(fx):
    assert is_base_molecule(minimal()).is_base
    rep = is_base_molecule(fx.molecule)
    assert rep.is_base and rep.bond_count == 47
    m = minimal()
    m.remove_bond(m.bond_ids()[0])
    rep = is_base_molecule(m)
    assert not rep.is_base and rep.bond_count == 2


def test_base_on_enumeration():
    for c in enumerate_couples(5):
        assert is_base_molecule(molecule_from_couple(c)).is_base


# ------------------------------------------------------------ bridges


def test_bridges_minimal_empty():
    assert find_bridges(minimal()) == set()


def test_bridges_path():
    m = build("abc", [("a", "b"), ("b", "c")])
    assert find_bridges(m) == {0, 1}


def test_bridges_after_first_scripted_step(fx):
    m = after_script(fx, 1)
    ends = {m.bond(b).pair for b in find_bridges(m)}
    assert ("-1b", "1b") in ends
    assert ("-4b", "-4t") in ends


def test_double_bond_is_not_bridge():
    m = build("abc", [("a", "b"), ("b", "a"), ("b", "c")])
    assert find_bridges(m) == {2}


# ------------------------------------------------------------ multiplicities


def test_multiplicities_minimal():
    (x,) = find_multiplicities(minimal())
    assert x.count == 3 and x.forward + x.backward == 3


def test_multiplicities_fixture(fx):
    doubles = {x.pair for x in find_multiplicities(fx.molecule) if x.count == 2}
    want = {("-2t", "-3t"), ("-2b", "-3b"), ("+2t", "+3t"), ("+2b", "+3b"), ("3b", "4b"), ("1b", "2b")}
    assert want <= doubles


def test_multiplicities_empty():
    assert find_multiplicities(Molecule()) == []


# ------------------------------------------------------------ components


def test_components_examples():
    assert len(components(minimal())) == 1
    two = build(["a", "b", "c", "d"], [("a", "b"), ("b", "a"), ("a", "b"), ("c", "d"), ("d", "c"), ("c", "d")])
    assert components(two) == [["a", "b"], ["c", "d"]]
    assert components(build("xyz", [])) == [["x"], ["y"], ["z"]]


# ------------------------------------------------------------ validation


def test_validate_caps_and_full_components():
    m = build("ab", [("a", "b"), ("a", "b"), ("a", "b")])
    rep = validate_molecule(m)
    assert not rep.ok and any("out-degree" in msg for _, msg in rep.violations)
    ring = build("abcd", [("a", "b"), ("b", "a"), ("b", "c"), ("c", "d"), ("d", "c"), ("d", "a")])
    # a and c have degree 3, so the component is not all degree 4
    assert validate_molecule(ring).ok
    full = build("ab", [("a", "b"), ("b", "a"), ("a", "b"), ("b", "a")])
    assert any("degree 4" in msg for _, msg in validate_molecule(full).violations)


def test_insert_rejects_self_loop_and_reuse():
    m = build("ab", [("a", "b")])
    with pytest.raises(MoleculeError):
        m.add_bond("a", "a")
    m.remove_bond(0)
    with pytest.raises(MoleculeError):
        m.insert_bond(Bond(0, "a", "b"))
    assert m.add_bond("a", "b").id == 1


def test_bond_ids_never_reused():
    m = build("ab", [("a", "b"), ("b", "a")])
    m.remove_bond(1)
    assert m.add_bond("a", "b").id == 2


def test_remove_atom_requires_isolation():
    m = build("ab", [("a", "b")])
    with pytest.raises(MoleculeError):
        m.remove_atom("a")


# ------------------------------------------------------------ chains


def test_minimal_has_no_chains():
    assert detect_chains(minimal()) == []


def test_type_one_chain_at_scripted_step_eight(fx):
    m = after_script(fx, 7)
    starts = [f for f in detect_chains(m) if f.kind == "I"]
    assert any(f.atoms[:2] == ("3b", "4b") for f in starts)


def test_ladder_of_four():
    atoms = [f"t{i}" for i in range(4)] + [f"b{i}" for i in range(4)]
    edges = []
    for i in range(4):
        edges += [(f"t{i}", f"b{i}"), (f"b{i}", f"t{i}")]
    for i in range(3):
        edges += [(f"t{i}", f"t{i+1}"), (f"b{i+1}", f"b{i}")]
    m = build(atoms, edges)
    ladders = [f for f in detect_chains(m) if f.kind == "II"]
    assert len(ladders) == 1 and len(ladders[0]) == 4


def test_same_direction_rails_are_not_a_ladder():
    atoms = [f"t{i}" for i in range(3)] + [f"b{i}" for i in range(3)]
    edges = []
    for i in range(3):
        edges += [(f"t{i}", f"b{i}"), (f"b{i}", f"t{i}")]
    for i in range(2):
        edges += [(f"t{i}", f"t{i+1}"), (f"b{i}", f"b{i+1}")]
    assert [f for f in detect_chains(build(atoms, edges)) if f.kind == "II"] == []


# ------------------------------------------------------------ JSON


def test_json_round_trip():
    for seed in range(10):
        m = molecule_from_couple(random_couple(3, 4, seed))
        back, dim = molecule_from_json(molecule_to_json(m, 5))
        assert back == m and dim == 5


def test_json_rejects_version():
    doc = molecule_to_json(minimal())
    doc["version"] = 9
    with pytest.raises(MoleculeError):
        molecule_from_json(doc)
