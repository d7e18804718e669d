"""Step descriptors, structural preconditions and their application."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Optional

from ..forest import ForestState, add_safe_edges_max
from ..molecule import Bond, BondKind, Molecule, component_count, find_bridges
from .kinds import D3D3_KINDS, INJECTING, S3S3_KINDS, StepKind, table_values

K = StepKind


class StepError(Exception):
    """A step could not be applied."""


class PreconditionError(StepError):
    pass


class InvariantError(StepError):
    """Applying a step broke a molecule invariant."""


@dataclass(frozen=True)
class StepDescriptor:
    """What to do next.

    ``atoms`` anchors atom-centric steps, ``bond`` names the bond of a BR.
    ``inject`` optionally picks the two bonds whose far ends receive the new
    bond of the injecting steps.  ``prefer`` lists bond ids to offer to G
    first.  ``forced`` lets a scripted BR skip its bridge test.
    """

    kind: StepKind
    atoms: tuple[str, ...] = ()
    bond: Optional[int] = None
    inject: Optional[tuple[int, int]] = None
    prefer: tuple[int, ...] = ()
    forced: bool = False
    checkpoint: Optional[str] = None
    alternatives: tuple[str, ...] = ()

    def label(self) -> str:
        where = ",".join(self.atoms) if self.atoms else f"#{self.bond}"
        return f"{self.kind.value}({where})"


@dataclass
class Plan:
    atoms: list[str]
    bonds: list[int]
    inject: Optional[tuple[str, str]] = None


@dataclass
class StepRecord:
    index: int
    kind: StepKind
    atoms_removed: list[str]
    bonds_removed: list[int]
    bonds_injected: list[Bond]
    g_edges_added: list[int]
    g_edges_rejected: list[int]
    delta_chi_computed: int
    delta_gamma: Fraction
    delta_kappa: Fraction
    checkpoint: Optional[str] = None
    anchor: tuple[str, ...] = ()
    alternatives: tuple[str, ...] = ()
    table_checked: bool = True
    forced: bool = False
    offered: list[tuple[str, str, int]] = field(default_factory=list)


# ---------------------------------------------------------------- helpers


def _fail(desc: StepDescriptor, why: str):
    raise PreconditionError(f"{desc.label()}: {why}")


def _atoms(m: Molecule, desc: StepDescriptor, count: int) -> tuple[str, ...]:
    if len(desc.atoms) < count:
        _fail(desc, f"needs {count} anchor atoms")
    for a in desc.atoms[:count]:
        if not m.has_atom(a):
            _fail(desc, f"unknown atom {a!r}")
    if len(set(desc.atoms[:count])) != count:
        _fail(desc, "anchor atoms must differ")
    return desc.atoms[:count]


def _deg(m: Molecule, desc, a: str, *allowed: int) -> None:
    if m.degree(a) not in allowed:
        _fail(desc, f"atom {a} has degree {m.degree(a)}, needs {'/'.join(map(str, allowed))}")


def _mult(m: Molecule, desc, a: str, b: str, k: int) -> list[Bond]:
    bs = m.bonds_between(a, b)
    if len(bs) != k:
        _fail(desc, f"{a} and {b} share {len(bs)} bonds, need {k}")
    return bs


def _union_bonds(m: Molecule, atoms) -> list[int]:
    out: set[int] = set()
    for a in atoms:
        out.update(m.incident(a))
    return sorted(out)


def through_injection(l_in: Bond, l_out: Bond, a: str, b: str) -> Optional[tuple[str, str]]:
    """The new bond replacing the path x - a - b - y.

    ``l_in`` touches ``a`` and ``l_out`` touches ``b``.  The flow must pass
    through: into ``a`` and out of ``b`` gives x -> y, out of ``a`` and into
    ``b`` gives y -> x.  Anything else has no consistent direction.
    """
    x, y = l_in.other(a), l_out.other(b)
    if l_in.head == a and l_out.tail == b:
        return (x, y)
    if l_in.tail == a and l_out.head == b:
        return (y, x)
    return None


def s3s3_injections(m: Molecule, v1: str, v2: str) -> list[tuple[int, int, tuple[str, str]]]:
    """All (l2, l4, new bond endpoints) choices for the 3S3 bond injection."""
    (l1,) = m.bonds_between(v1, v2)
    out = []
    for i in m.incident(v1):
        if i == l1.id:
            continue
        for j in m.incident(v2):
            if j == l1.id:
                continue
            e = through_injection(m.bond(i), m.bond(j), v1, v2)
            if e is not None and e[0] != e[1]:
                out.append((i, j, e))
    return out


def _third_bond(m: Molecule, a: str, partner: str) -> Bond:
    (b,) = [m.bond(i) for i in m.incident(a) if m.bond(i).other(a) != partner]
    return b


def d3d3_injection(m: Molecule, v1: str, v2: str) -> Optional[tuple[int, int, tuple[str, str]]]:
    l3, l4 = _third_bond(m, v1, v2), _third_bond(m, v2, v1)
    # path v4 - v2 - v1 - v3: v4 -> v3 when l3 leaves v1, v3 -> v4 when it enters v1
    e = through_injection(l4, l3, v2, v1)
    if e is None or e[0] == e[1]:
        return None
    return l3.id, l4.id, e


def d3d3_six_pattern(m: Molecule, v1: str, v2: str) -> Optional[tuple[str, str, str, str]]:
    """(v3, v4, v5, v6) when v1, v2 sit in the nine-bond pattern of 3D3-6G."""
    l3, l4 = _third_bond(m, v1, v2), _third_bond(m, v2, v1)
    v3, v4 = l3.other(v1), l4.other(v2)
    if v3 == v4 or m.degree(v3) != 4 or m.degree(v4) != 4 or m.multiplicity(v3, v4) != 1:
        return None
    v5 = [w for w in m.neighbors(v3) if w not in (v1, v4) and m.multiplicity(v3, w) == 2]
    v6 = [w for w in m.neighbors(v4) if w not in (v2, v3) and m.multiplicity(v4, w) == 2]
    if len(v5) != 1 or len(v6) != 1 or {v5[0], v6[0]} & {v1, v2}:
        return None
    return v3, v4, v5[0], v6[0]


def r3_special_pairs(m: Molecule, v: str) -> list[tuple[str, str]]:
    """Neighbour pairs (a, b) of v joined by a single bond, each double-bonded to a further atom."""
    nb = m.neighbors(v)
    out = []
    for i, a in enumerate(nb):
        for b in nb[i + 1:]:
            if m.multiplicity(a, b) != 1:
                continue
            da = [w for w in m.neighbors(a) if w not in (v, b) and m.multiplicity(a, w) == 2]
            db = [w for w in m.neighbors(b) if w not in (v, a) and m.multiplicity(b, w) == 2]
            if da and db:
                out.append((a, b))
    return out


def _r3_shape(m: Molecule, desc, v: str) -> None:
    _deg(m, desc, v, 3)
    nb = m.neighbors(v)
    if len(nb) != 3:
        _fail(desc, f"atom {v} needs three single bonds")
    for w in nb:
        _deg(m, desc, w, 4)


# ---------------------------------------------------------------- planning


def plan_step(m: Molecule, desc: StepDescriptor) -> Plan:
    """Check structural preconditions and decide exactly what the step removes and adds."""
    k = desc.kind
    if k is K.DA:
        (v,) = _atoms(m, desc, 1)
        if not m.atom(v).degenerate:
            _fail(desc, f"atom {v} is not degenerate")
        if m.degree(v) == 0:
            _fail(desc, f"atom {v} is isolated")
        return Plan([v], m.incident(v))

    if k in (K.TB1, K.TB2):
        v1, v2 = _atoms(m, desc, 2)
        _mult(m, desc, v1, v2, 3)
        degs = sorted((m.degree(v1), m.degree(v2)))
        if degs != ([3, 3] if k is K.TB1 else [3, 4]):
            _fail(desc, f"degrees {degs} do not fit {k.value}")
        return Plan([v1, v2], _union_bonds(m, (v1, v2)))

    if k is K.BR:
        if desc.bond is None or not m.has_bond(desc.bond):
            _fail(desc, "unknown bond")
        b = m.bond(desc.bond)
        if desc.forced:
            return Plan([], [x.id for x in m.bonds_between(b.tail, b.head)])
        if desc.bond not in find_bridges(m):
            _fail(desc, f"bond {b.tail}->{b.head} is not a bridge")
        return Plan([], [b.id])

    if k in S3S3_KINDS:
        v1, v2 = _atoms(m, desc, 2)
        _deg(m, desc, v1, 3)
        _deg(m, desc, v2, 3)
        _mult(m, desc, v1, v2, 1)
        plan = Plan([v1, v2], _union_bonds(m, (v1, v2)))
        if k is K.S3S3_3G:
            options = s3s3_injections(m, v1, v2)
            if desc.inject is not None:
                options = [o for o in options if (o[0], o[1]) == tuple(desc.inject)]
            if not options:
                _fail(desc, "no bond pair with a consistent direction for the new bond")
            plan.inject = options[0][2]
        return plan

    if k in D3D3_KINDS:
        v1, v2 = _atoms(m, desc, 2)
        _deg(m, desc, v1, 3)
        _deg(m, desc, v2, 3)
        _mult(m, desc, v1, v2, 2)
        if k is K.D3D3_6G:
            pat = d3d3_six_pattern(m, v1, v2)
            if pat is None:
                _fail(desc, "atoms do not form the nine-bond pattern")
            atoms = [v1, v2, pat[0], pat[1]]
            return Plan(atoms, _union_bonds(m, atoms))
        plan = Plan([v1, v2], _union_bonds(m, (v1, v2)))
        if k is K.D3D3_3G:
            inj = d3d3_injection(m, v1, v2)
            if inj is None:
                _fail(desc, "the outer bonds have no consistent direction for the new bond")
            plan.inject = inj[2]
        return plan

    if k is K.D3D4G:
        v1, v2 = _atoms(m, desc, 2)
        _deg(m, desc, v1, 3)
        _deg(m, desc, v2, 4)
        _mult(m, desc, v1, v2, 2)
        return Plan([v1, v2], _union_bonds(m, (v1, v2)))

    if k is K.S3S2G:
        v1, v2 = _atoms(m, desc, 2)
        _deg(m, desc, v1, 3)
        _deg(m, desc, v2, 2)
        _mult(m, desc, v1, v2, 1)
        return Plan([v1, v2], _union_bonds(m, (v1, v2)))

    if k is K.R3_1:
        (v,) = _atoms(m, desc, 1)
        _r3_shape(m, desc, v)
        return Plan([v], m.incident(v))

    if k is K.R3_2G:
        (v,) = _atoms(m, desc, 1)
        _r3_shape(m, desc, v)
        pairs = r3_special_pairs(m, v)
        if len(desc.atoms) >= 3:
            want = tuple(sorted(desc.atoms[1:3]))
            pairs = [p for p in pairs if p == want]
        if not pairs:
            _fail(desc, "no special bond among the neighbours")
        atoms = [v, *pairs[0]]
        return Plan(atoms, _union_bonds(m, atoms))

    if k in (K.R2_1, K.R2_2G):
        (v,) = _atoms(m, desc, 1)
        _deg(m, desc, v, 2)
        nb = m.neighbors(v)
        if len(nb) != 1:
            _fail(desc, f"atom {v} needs a double bond")
        _deg(m, desc, nb[0], 4)
        a, b = m.bonds_between(v, nb[0])
        if (a.tail != b.tail) != (k is K.R2_1):
            _fail(desc, "double bond directions do not fit " + k.value)
        return Plan([v], m.incident(v))

    if k is K.R2_3:
        (v,) = _atoms(m, desc, 1)
        _deg(m, desc, v, 2)
        nb = m.neighbors(v)
        if len(nb) != 2:
            _fail(desc, f"atom {v} needs two single bonds")
        degs = sorted(m.degree(w) for w in nb)
        if degs not in ([2, 4], [4, 4]):
            _fail(desc, f"neighbour degrees {degs} do not fit 2R-3")
        return Plan([v], m.incident(v))

    if k is K.R2_4:
        (v,) = _atoms(m, desc, 1)
        _deg(m, desc, v, 2)
        nb = m.neighbors(v)
        if len(nb) != 2:
            _fail(desc, f"atom {v} needs two single bonds")
        for w in nb:
            _deg(m, desc, w, 2)
            if any(m.degree(x) == 3 for x in m.neighbors(w)):
                _fail(desc, f"neighbour {w} touches a degree-3 atom")
        atoms = [v, *nb]
        return Plan(atoms, _union_bonds(m, atoms))

    if k is K.R2_5:
        (v,) = _atoms(m, desc, 1)
        _deg(m, desc, v, 2)
        nb = m.neighbors(v)
        if len(nb) != 1:
            _fail(desc, f"atom {v} needs a double bond")
        if len(desc.atoms) >= 2 and desc.atoms[1] != nb[0]:
            _fail(desc, f"atom {v} is not double bonded to {desc.atoms[1]}")
        _deg(m, desc, nb[0], 2)
        return Plan([v, nb[0]], _union_bonds(m, (v, nb[0])))

    _fail(desc, "unsupported step kind")  # pragma: no cover


# ---------------------------------------------------------------- mutation


def mutate(m: Molecule, plan: Plan) -> list[Bond]:
    """Remove what the plan names and add its bond, if any; returns injected bonds."""
    for b in plan.bonds:
        m.remove_bond(b)
    for a in plan.atoms:
        m.remove_atom(a)
    if plan.inject is None:
        return []
    return [m.add_bond(plan.inject[0], plan.inject[1], BondKind.INJECTED)]


def check_after(m: Molecule, injected: list[Bond]) -> Optional[str]:
    """Invariant problems an injected bond could cause; None when all is well.

    Removal alone only lowers degrees, so only the injected endpoints and
    their component need checking.
    """
    for b in injected:
        for a in (b.tail, b.head):
            if m.in_degree(a) > 2 or m.out_degree(a) > 2:
                return f"atom {a} breaks the two-in two-out cap"
        k = m.multiplicity(b.tail, b.head)
        if k > 3:
            return f"{k} parallel bonds between {b.tail} and {b.head}"
        if k == 3 and sorted((m.degree(b.tail), m.degree(b.head))) not in ([3, 3], [3, 4]):
            return f"triple bond {b.tail}-{b.head} cannot be cleared"
        seen, stack = {b.tail}, [b.tail]
        full = True
        while stack and full:
            x = stack.pop()
            if m.degree(x) != 4:
                full = False
            for w in m.neighbors(x):
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        if full:
            return f"component of {b.tail} has every atom at degree 4"
    return None


def chi(m: Molecule) -> int:
    return m.bond_count - len(m) + component_count(m)


def dry_run(m: Molecule, desc: StepDescriptor) -> Optional[int]:
    """Delta chi of applying ``desc`` to a copy, or None if it is not applicable."""
    try:
        plan = plan_step(m, desc)
    except PreconditionError:
        return None
    before = chi(m)
    work = m.copy()
    injected = mutate(work, plan)
    if check_after(work, injected) is not None:
        return None
    return chi(work) - before


def offer_order(removed_ids, removed_bonds: dict[int, Bond], prefer=()) -> list[tuple[str, str, int]]:
    ids = [i for i in prefer if i in removed_bonds] + [i for i in sorted(removed_ids) if i not in prefer]
    return [(removed_bonds[i].tail, removed_bonds[i].head, i) for i in ids]


def apply_step(m: Molecule, forest: ForestState, desc: StepDescriptor, d: int = 3, index: int = 0) -> StepRecord:
    """Apply one step: mutate the molecule, offer every removed bond to G, fill the record."""
    plan = plan_step(m, desc)
    before = chi(m)
    removed = {b: m.bond(b) for b in plan.bonds}
    injected = mutate(m, plan)
    problem = check_after(m, injected)
    if problem is not None:
        raise InvariantError(f"{desc.label()}: {problem}")
    dchi = chi(m) - before
    offered = offer_order(plan.bonds, removed, desc.prefer)
    added = add_safe_edges_max(forest, offered)
    added_ids = [e[2] for e in added]
    added_set = set(added_ids)
    dgamma, dkappa, checked = table_values(desc.kind, dchi, d)
    return StepRecord(
        index=index,
        kind=desc.kind,
        atoms_removed=list(plan.atoms),
        bonds_removed=sorted(plan.bonds),
        bonds_injected=injected,
        g_edges_added=added_ids,
        g_edges_rejected=[e[2] for e in offered if e[2] not in added_set],
        delta_chi_computed=dchi,
        delta_gamma=dgamma,
        delta_kappa=dkappa,
        checkpoint=desc.checkpoint,
        anchor=desc.atoms if desc.atoms else tuple(removed[plan.bonds[0]].pair if plan.bonds else ()),
        alternatives=desc.alternatives,
        table_checked=checked,
        forced=desc.forced,
        offered=offered,
    )
