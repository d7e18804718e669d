"""Choosing the next step: the strict priority order of the reduction loop."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Callable, Optional

from ..molecule import Molecule, find_bridges
from .kinds import TABLE, StepKind
from .steps import (
    StepDescriptor,
    StepError,
    d3d3_injection,
    d3d3_six_pattern,
    dry_run,
    r3_special_pairs,
    s3s3_injections,
    _third_bond,
)

K = StepKind

# hook(molecule, family, (v1, v2)) -> a functional-group kind or None
FunctionalGroupMatcher = Callable[[Molecule, str, tuple[str, str]], Optional[StepKind]]


class Stuck(StepError):
    """No rule applies although bonds remain."""


@dataclass(frozen=True)
class ReductionConfig:
    """Switches for conditions the rule text names without defining.

    ``cond_i`` and ``cond_ii`` gate the 3S3 checkpoints, ``has_special_bond``
    enables 3R-2G, ``functional_group_matcher`` may claim 3S3-5G or
    3D3-4G/5G, and ``allow_initial_triple_bonds`` lets a run start from a
    molecule that already holds a triple bond.
    """

    cond_i: bool = True
    cond_ii: bool = True
    has_special_bond: bool = False
    functional_group_matcher: Optional[FunctionalGroupMatcher] = None
    allow_initial_triple_bonds: bool = False


def admissible(m: Molecule, desc: StepDescriptor) -> bool:
    """Applicable on a copy, keeps the invariants, and lands inside the table's delta chi set."""
    dchi = dry_run(m, desc)
    if dchi is None:
        return False
    row = TABLE.get(desc.kind)
    return row is None or dchi in row.chi


def _checkpoint(options: list[StepDescriptor]) -> list[StepDescriptor]:
    if len(options) < 2:
        return [StepDescriptor(o.kind, o.atoms, o.bond, o.inject, o.prefer) for o in options]
    names = tuple(o.kind.value for o in options)
    return [
        StepDescriptor(o.kind, o.atoms, o.bond, o.inject, o.prefer, checkpoint=tag, alternatives=names)
        for o, tag in zip(options, ("first", "second"))
    ]


def _first_admissible(m: Molecule, descs) -> Optional[StepDescriptor]:
    for d in descs:
        if admissible(m, d):
            return d
    return None


# ---------------------------------------------------------------- individual rules


def _triple_bonds(m: Molecule) -> list[StepDescriptor]:
    counts = Counter(b.pair for b in m._bonds.values())
    for a, b in sorted(p for p, c in counts.items() if c == 3):
        degs = sorted((m.degree(a), m.degree(b)))
        if degs == [3, 3]:
            return [StepDescriptor(K.TB1, (a, b))]
        if degs == [3, 4]:
            return [StepDescriptor(K.TB2, (a, b))]
    return []


def _bridge(m: Molecule) -> list[StepDescriptor]:
    br = find_bridges(m)
    if not br:
        return []
    b = m.bond(min(br))
    return [StepDescriptor(K.BR, (b.tail, b.head), bond=b.id)]


def _pairs(m: Molecule, deg_a: int, deg_b: int, mult: int):
    for a in m.atom_ids():
        if m.degree(a) != deg_a:
            continue
        for b in m.neighbors(a):
            if m.degree(b) != deg_b or (deg_a == deg_b and b < a):
                continue
            if m.multiplicity(a, b) == mult:
                yield a, b


def _s3s3(m: Molecule, cfg: ReductionConfig) -> list[StepDescriptor]:
    for v1, v2 in _pairs(m, 3, 3, 1):
        at = (v1, v2)
        if cfg.functional_group_matcher is not None:
            hook = cfg.functional_group_matcher(m, "3S3", at)
            if hook is K.S3S3_5G and admissible(m, StepDescriptor(hook, at)):
                return [StepDescriptor(hook, at)]
        if cfg.cond_i and cfg.cond_ii:
            outer = [x for x in m.neighbors(v1) + m.neighbors(v2) if x not in at]
            if all(m.degree(x) == 4 for x in outer):
                opts = [StepDescriptor(K.S3S3_1, at), StepDescriptor(K.S3S3_2G, at)]
                opts = [o for o in opts if admissible(m, o)]
            else:
                opts = [StepDescriptor(K.S3S3_2G, at)] if admissible(m, StepDescriptor(K.S3S3_2G, at)) else []
                inj = _first_admissible(
                    m,
                    (
                        StepDescriptor(K.S3S3_3G, at, inject=(i, j))
                        for i, j, (x, y) in s3s3_injections(m, v1, v2)
                        if m.degree(x) != 4 and m.degree(y) != 4
                    ),
                )
                if inj is not None:
                    opts.append(inj)
            if opts:
                return _checkpoint(opts)
        return [StepDescriptor(K.S3S3_4G, at)]
    return []


def _ladder_continues(m: Molecule, v1: str, v2: str) -> bool:
    """v3 and v4 double bonded and each tied onward by single bonds of opposite direction."""
    l3, l4 = _third_bond(m, v1, v2), _third_bond(m, v2, v1)
    v3, v4 = l3.other(v1), l4.other(v2)
    if v3 == v4 or m.multiplicity(v3, v4) != 2:
        return False
    for v5 in m.neighbors(v3):
        if v5 in (v1, v4) or m.multiplicity(v3, v5) != 1:
            continue
        for v6 in m.neighbors(v4):
            if v6 in (v2, v3, v5) or m.multiplicity(v4, v6) != 1:
                continue
            (x,), (y,) = m.bonds_between(v3, v5), m.bonds_between(v4, v6)
            if (x.tail == v3) != (y.tail == v4):
                return True
    return False


def _d3d3(m: Molecule, cfg: ReductionConfig) -> list[StepDescriptor]:
    for v1, v2 in _pairs(m, 3, 3, 2):
        at = (v1, v2)
        if cfg.functional_group_matcher is not None:
            hook = cfg.functional_group_matcher(m, "3D3", at)
            if hook in (K.D3D3_4G, K.D3D3_5G) and admissible(m, StepDescriptor(hook, at)):
                return [StepDescriptor(hook, at)]
        one_two = [StepDescriptor(K.D3D3_1, at), StepDescriptor(K.D3D3_2G, at)]
        if _ladder_continues(m, v1, v2):
            return _checkpoint(one_two)
        v3 = _third_bond(m, v1, v2).other(v1)
        v4 = _third_bond(m, v2, v1).other(v2)
        if m.degree(v3) != 4 or m.degree(v4) != 4:
            three = StepDescriptor(K.D3D3_3G, at)
            if d3d3_injection(m, v1, v2) is not None and admissible(m, three):
                return _checkpoint([StepDescriptor(K.D3D3_2G, at), three])
        if d3d3_six_pattern(m, v1, v2) is not None:
            six = StepDescriptor(K.D3D3_6G, at)
            if admissible(m, six):
                return [six]
        return _checkpoint(one_two)
    return []


def _d3d4(m: Molecule) -> list[StepDescriptor]:
    for v1, v2 in _pairs(m, 3, 4, 2):
        return [StepDescriptor(K.D3D4G, (v1, v2))]
    return []


def _s3s2(m: Molecule) -> list[StepDescriptor]:
    for v1, v2 in _pairs(m, 3, 2, 1):
        return [StepDescriptor(K.S3S2G, (v1, v2))]
    return []


def _r3(m: Molecule, cfg: ReductionConfig) -> list[StepDescriptor]:
    for v in m.atom_ids():
        if m.degree(v) != 3:
            continue
        nb = m.neighbors(v)
        if len(nb) != 3 or any(m.degree(w) != 4 for w in nb):
            continue
        if cfg.has_special_bond:
            for a, b in r3_special_pairs(m, v):
                d = StepDescriptor(K.R3_2G, (v, a, b))
                if admissible(m, d):
                    return [d]
        return [StepDescriptor(K.R3_1, (v,))]
    return []


def type_one_start(m: Molecule, v: str) -> bool:
    """Degree-2 atom with an opposite-direction double bond to a degree-4 atom."""
    if not m.has_atom(v) or m.degree(v) != 2:
        return False
    nb = m.neighbors(v)
    if len(nb) != 1 or m.degree(nb[0]) != 4:
        return False
    a, b = m.bonds_between(v, nb[0])
    return a.tail != b.tail


def _two_r(m: Molecule) -> list[StepDescriptor]:
    odd = [a for a in m.atom_ids() if m.degree(a) in (1, 3)]
    if odd:
        raise Stuck(f"atom {odd[0]} has degree {m.degree(odd[0])} but no rule claimed it")
    twos = [a for a in m.atom_ids() if m.degree(a) == 2]
    for v in twos:
        nb = m.neighbors(v)
        if len(nb) == 1 and m.degree(nb[0]) == 4:
            a, b = m.bonds_between(v, nb[0])
            if a.tail == b.tail:
                return [StepDescriptor(K.R2_2G, (v,))]
    for v in twos:
        nb = m.neighbors(v)
        if len(nb) == 2 and 4 in (m.degree(nb[0]), m.degree(nb[1])):
            return [StepDescriptor(K.R2_3, (v,))]
    for v in twos:
        nb = m.neighbors(v)
        if len(nb) == 2 and m.degree(nb[0]) == 2 and m.degree(nb[1]) == 2:
            return [StepDescriptor(K.R2_4, (v,))]
    for v in twos:
        nb = m.neighbors(v)
        if len(nb) == 1 and m.degree(nb[0]) == 2:
            return [StepDescriptor(K.R2_5, (v, nb[0]))]
    for v in twos:
        if type_one_start(m, v):
            return [StepDescriptor(K.R2_1, (v,))]
    return []


def match_next(m: Molecule, config: ReductionConfig = ReductionConfig(), chain_cursor: Optional[str] = None) -> list[StepDescriptor]:
    """Candidates for the next step: one normally, two at a checkpoint, none when only isolated atoms remain.

    ``chain_cursor`` names the partner atom of the previous 2R-1; while it
    still starts a type-I chain the chain is followed before anything else.
    Triple bonds are cleared first so a triple bond left by an injection,
    or present from the start, is handled ahead of bridge removal.
    """
    if m.bond_count == 0:
        return []
    if chain_cursor is not None and type_one_start(m, chain_cursor) and not find_bridges(m):
        return [StepDescriptor(K.R2_1, (chain_cursor,))]
    for rule in (
        _triple_bonds,
        _bridge,
        lambda x: _s3s3(x, config),
        lambda x: _d3d3(x, config),
        _d3d4,
        _s3s2,
        lambda x: _r3(x, config),
        _two_r,
    ):
        out = rule(m)
        if out:
            return out
    raise Stuck("bonds remain but no rule applies")
