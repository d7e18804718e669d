"""Running reductions: phase 1, the phase 2 loop, branch policies, scripts and the ledger."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence, Union

from ..forest import ForestState, init_forest, is_spanning_tree
from ..molecule import Bond, BondKind, Molecule, find_multiplicities, validate_molecule
from .kinds import TABLE, UNCHECKED, StepKind, classify
from .rules import ReductionConfig, Stuck, match_next
from .steps import InvariantError, PreconditionError, StepDescriptor, StepError, StepRecord, apply_step, chi

K = StepKind


class PathCapExceeded(StepError):
    pass


class ScriptError(StepError):
    def __init__(self, index: int, reason: str):
        super().__init__(f"script step {index}: {reason}")
        self.index = index
        self.reason = reason


# ---------------------------------------------------------------- policies


@dataclass(frozen=True)
class First:
    pass


@dataclass(frozen=True)
class Second:
    pass


@dataclass(frozen=True)
class Random:
    seed: int = 0


@dataclass(frozen=True)
class Exhaustive:
    cap: int = 64

    def __post_init__(self):
        if self.cap < 1:
            raise ValueError("path cap must be at least 1")


@dataclass(frozen=True)
class Scripted:
    steps: tuple[StepDescriptor, ...]
    complete: bool = True


BranchPolicy = Union[First, Second, Random, Exhaustive, Scripted]


# ---------------------------------------------------------------- trace and ledger


@dataclass
class Ledger:
    dimension: int = 3
    chi_history: list[int] = field(default_factory=list)
    gamma_total: Fraction = Fraction(0)
    kappa_total: Fraction = Fraction(0)

    def __post_init__(self):
        if self.dimension < 3:
            raise ValueError("dimension must be at least 3")

    def record(self, rec: StepRecord, chi_after: int) -> None:
        self.chi_history.append(chi_after)
        self.gamma_total += rec.delta_gamma
        self.kappa_total += rec.delta_kappa

    def copy(self) -> "Ledger":
        return Ledger(self.dimension, list(self.chi_history), self.gamma_total, self.kappa_total)


@dataclass
class Trace:
    records: list[StepRecord]
    ledger: Ledger
    forest: ForestState
    molecule: Optional[Molecule] = None  # final state

    @property
    def spanning_tree(self) -> bool:
        return is_spanning_tree(self.forest)

    @property
    def g_edges(self) -> list[int]:
        return [b for r in self.records for b in r.g_edges_added]

    @property
    def choices(self) -> tuple[str, ...]:
        return tuple(r.checkpoint for r in self.records if r.checkpoint)


class _Run:
    """Mutable state of one reduction path."""

    def __init__(self, molecule: Molecule, forest: ForestState, ledger: Ledger, records=None, cursor=None):
        self.m = molecule
        self.forest = forest
        self.ledger = ledger
        self.records: list[StepRecord] = records if records is not None else []
        self.cursor: Optional[str] = cursor

    def step(self, desc: StepDescriptor) -> StepRecord:
        rec = apply_step(self.m, self.forest, desc, self.ledger.dimension, index=len(self.records) + 1)
        self.records.append(rec)
        self.ledger.record(rec, self.ledger.chi_history[-1] + rec.delta_chi_computed)
        self.cursor = None
        if rec.kind is K.R2_1:
            # the partner of the removed double bond carries the chain on
            (v,) = rec.atoms_removed
            t, h, _ = rec.offered[0]
            self.cursor = h if t == v else t
        return rec

    def fork(self) -> "_Run":
        f = self.forest.copy()
        return _Run(self.m.copy(), f, self.ledger.copy(), list(self.records), self.cursor)

    def trace(self) -> Trace:
        return Trace(self.records, self.ledger, self.forest, self.m)


def phase1(molecule: Molecule, forest: ForestState, d: int = 3, start_index: int = 1) -> list[StepRecord]:
    """Remove every non-isolated degenerate atom with DA, smallest id first."""
    out = []
    while True:
        targets = [a for a in molecule.atom_ids() if molecule.atom(a).degenerate and molecule.degree(a) > 0]
        if not targets:
            return out
        out.append(apply_step(molecule, forest, StepDescriptor(K.DA, (targets[0],)), d, index=start_index + len(out)))


def _check_start(molecule: Molecule, config: ReductionConfig) -> None:
    rep = validate_molecule(molecule)
    if not rep.ok:
        where, what = rep.violations[0]
        raise InvariantError(f"invalid molecule at {where}: {what}")
    if not config.allow_initial_triple_bonds:
        triples = [x.pair for x in find_multiplicities(molecule) if x.count == 3]
        if triples:
            raise PreconditionError(f"molecule starts with a triple bond {triples[0]} (allow_initial_triple_bonds is off)")


def _start(molecule: Molecule, d: int) -> _Run:
    m = molecule.copy()
    forest = init_forest(m)
    ledger = Ledger(d, [chi(m)])
    run = _Run(m, forest, ledger)
    for rec in phase1(m, forest, d):
        run.records.append(rec)
        ledger.record(rec, chi(m))
    return run


def _loop(run: _Run, config: ReductionConfig, pick, max_steps: int) -> None:
    while True:
        opts = match_next(run.m, config, run.cursor)
        if not opts:
            return
        if len(run.records) >= max_steps:
            raise Stuck(f"step limit {max_steps} reached")
        run.step(opts[pick(opts)] if len(opts) > 1 else opts[0])


def run_reduction(
    molecule: Molecule,
    policy: BranchPolicy = First(),
    config: ReductionConfig = ReductionConfig(),
    d: int = 3,
    max_steps: Optional[int] = None,
):
    """Reduce a copy of ``molecule`` to isolated atoms, growing the forest G.

    Returns a Trace, or a list of Traces under the Exhaustive policy.
    """
    if isinstance(policy, Scripted):
        return run_scripted(molecule, policy.steps, d, complete=policy.complete, config=config)
    _check_start(molecule, config)
    limit = max_steps if max_steps is not None else 2 * len(molecule) + 2
    run = _start(molecule, d)
    if isinstance(policy, Exhaustive):
        return _explore(run, config, policy.cap, limit)
    if isinstance(policy, First):
        pick = lambda opts: 0
    elif isinstance(policy, Second):
        pick = lambda opts: 1
    elif isinstance(policy, Random):
        rng = random.Random(policy.seed)
        pick = lambda opts: rng.randrange(len(opts))
    else:
        raise TypeError(f"unknown policy {policy!r}")
    _loop(run, config, pick, limit)
    return run.trace()


def _explore(run: _Run, config: ReductionConfig, cap: int, limit: int) -> list[Trace]:
    done: list[Trace] = []
    pending = [run]
    while pending:
        cur = pending.pop()
        while True:
            opts = match_next(cur.m, config, cur.cursor)
            if not opts:
                done.append(cur.trace())
                if len(done) > cap:
                    raise PathCapExceeded(f"more than {cap} paths")
                break
            if len(cur.records) >= limit:
                raise Stuck(f"step limit {limit} reached")
            for alt in reversed(opts[1:]):
                branch = cur.fork()
                branch.step(alt)
                pending.append(branch)
            cur.step(opts[0])
    done.sort(key=lambda t: t.choices)
    return done


def run_scripted(
    molecule: Molecule,
    script: Sequence[StepDescriptor],
    d: int = 3,
    complete: bool = True,
    config: ReductionConfig = ReductionConfig(allow_initial_triple_bonds=True),
) -> Trace:
    """Apply exactly the scripted steps, then optionally finish with the automatic loop (policy First)."""
    m = molecule.copy()
    forest = init_forest(m)
    run = _Run(m, forest, Ledger(d, [chi(m)]))
    for i, desc in enumerate(script, start=1):
        try:
            run.step(desc)
        except StepError as exc:
            raise ScriptError(i, str(exc)) from None
    run.cursor = None
    if complete:
        _loop(run, config, lambda opts: 0, len(run.records) + 2 * len(molecule) + 2)
    return run.trace()


def parse_script(doc, molecule: Molecule) -> list[StepDescriptor]:
    """Turn a script document into descriptors, resolving BR endpoints into bond ids.

    Bond endpoints are resolved against the molecule as it will be when the
    step is reached, so the molecule is stepped along on a copy.
    """
    if not isinstance(doc, dict) or doc.get("version") != 1:
        raise ValueError("unsupported script format version")
    work = molecule.copy()
    forest = init_forest(work)
    out = []
    for i, step in enumerate(doc.get("steps", []), start=1):
        try:
            kind = StepKind.parse(step["kind"])
        except (KeyError, ValueError) as exc:
            raise ScriptError(i, f"bad kind: {exc}") from None
        bond = None
        atoms = tuple(step.get("at", ()))
        if "bond" in step:
            tail, head = step["bond"]
            if not (work.has_atom(tail) and work.has_atom(head)):
                raise ScriptError(i, f"unknown atoms in bond {tail}->{head}")
            same = [b for b in work.bonds_between(tail, head) if b.tail == tail]
            if not same:
                raise ScriptError(i, f"no bond {tail}->{head}")
            bond = same[0].id
            atoms = (tail, head)
        prefer = tuple(_resolve_pair(work, p, i) for p in step.get("prefer", ()))
        inject = None
        if "inject" in step:
            inject = tuple(_resolve_pair(work, p, i) for p in step["inject"])
        desc = StepDescriptor(kind, atoms if kind is not K.BR else (), bond, inject, prefer, bool(step.get("force", False)))
        out.append(desc)
        try:
            apply_step(work, forest, desc, 3)
        except StepError as exc:
            raise ScriptError(i, str(exc)) from None
    return out


def _resolve_pair(m: Molecule, pair, i: int) -> int:
    tail, head = pair
    same = [b for b in m.bonds_between(tail, head) if b.tail == tail] if m.has_atom(tail) and m.has_atom(head) else []
    if not same:
        raise ScriptError(i, f"no bond {tail}->{head}")
    return same[0].id


# ---------------------------------------------------------------- ledger checks


@dataclass
class LedgerReport:
    violations: list[tuple[int, str]] = field(default_factory=list)
    classes: list[Optional[str]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def ledger_check(records: Union[Trace, Iterable[StepRecord]], d: int = 3) -> LedgerReport:
    """Compare each record with its table row and classify it as normal or good."""
    if d < 3:
        raise ValueError("dimension must be at least 3")
    recs = records.records if isinstance(records, Trace) else list(records)
    rep = LedgerReport()
    for r in recs:
        row = TABLE.get(r.kind)
        if row is not None:
            if r.delta_chi_computed not in row.chi:
                rep.violations.append((r.index, f"{r.kind.value}: delta chi {r.delta_chi_computed} not in {sorted(row.chi)}"))
            want_g = r.delta_chi_computed + row.increment(d)
            if Fraction(r.delta_gamma) != want_g:
                rep.violations.append((r.index, f"{r.kind.value}: delta gamma {r.delta_gamma} != {want_g}"))
            if Fraction(r.delta_kappa) != row.kappa:
                rep.violations.append((r.index, f"{r.kind.value}: delta kappa {r.delta_kappa} != {row.kappa}"))
        elif r.kind in UNCHECKED:
            if Fraction(r.delta_gamma) != r.delta_chi_computed or Fraction(r.delta_kappa) != 0:
                rep.violations.append((r.index, f"{r.kind.value}: unchecked kinds carry delta gamma = delta chi and delta kappa = 0"))
        cls = classify(r.delta_chi_computed, Fraction(r.delta_gamma), d)
        rep.classes.append(cls)
        if cls is None:
            rep.violations.append((r.index, f"{r.kind.value}: neither normal nor good"))
    return rep


def bound_exponents(records: Union[Trace, Iterable[StepRecord]], d: int = 3) -> tuple[Fraction, Fraction]:
    recs = records.records if isinstance(records, Trace) else list(records)
    return sum((Fraction(r.delta_gamma) for r in recs), Fraction(0)), sum((Fraction(r.delta_kappa) for r in recs), Fraction(0))


# ---------------------------------------------------------------- trace files


def fraction_text(x: Fraction) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def record_to_json(r: StepRecord) -> dict:
    return {
        "index": r.index,
        "kind": r.kind.value,
        "anchor": list(r.anchor),
        "atoms_removed": list(r.atoms_removed),
        "bonds_removed": list(r.bonds_removed),
        "bonds_injected": [{"id": b.id, "tail": b.tail, "head": b.head, "kind": b.kind.value} for b in r.bonds_injected],
        "g_edges_added": list(r.g_edges_added),
        "g_edges_rejected": list(r.g_edges_rejected),
        "offered": [list(e) for e in r.offered],
        "delta_chi_computed": r.delta_chi_computed,
        "delta_gamma": fraction_text(r.delta_gamma),
        "delta_kappa": fraction_text(r.delta_kappa),
        "checkpoint": r.checkpoint,
        "alternatives": list(r.alternatives),
        "table_checked": r.table_checked,
        "forced": r.forced,
    }


def record_from_json(obj: dict) -> StepRecord:
    try:
        return StepRecord(
            index=int(obj["index"]),
            kind=StepKind.parse(obj["kind"]),
            atoms_removed=[str(a) for a in obj["atoms_removed"]],
            bonds_removed=[int(b) for b in obj["bonds_removed"]],
            bonds_injected=[Bond(int(b["id"]), b["tail"], b["head"], BondKind(b.get("kind", "INJECTED"))) for b in obj["bonds_injected"]],
            g_edges_added=[int(b) for b in obj["g_edges_added"]],
            g_edges_rejected=[int(b) for b in obj["g_edges_rejected"]],
            delta_chi_computed=int(obj["delta_chi_computed"]),
            delta_gamma=Fraction(obj["delta_gamma"]),
            delta_kappa=Fraction(obj["delta_kappa"]),
            checkpoint=obj.get("checkpoint"),
            anchor=tuple(obj.get("anchor", ())),
            alternatives=tuple(obj.get("alternatives", ())),
            table_checked=bool(obj.get("table_checked", True)),
            forced=bool(obj.get("forced", False)),
            offered=[(e[0], e[1], int(e[2])) for e in obj.get("offered", [])],
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed step record: {exc}") from None


def trace_to_jsonl(trace: Trace) -> str:
    lines = [json.dumps(record_to_json(r), sort_keys=True) for r in trace.records]
    summary = {
        "summary": True,
        "version": 1,
        "dimension": trace.ledger.dimension,
        "gamma_total": fraction_text(trace.ledger.gamma_total),
        "kappa_total": fraction_text(trace.ledger.kappa_total),
        "chi_history": trace.ledger.chi_history,
        "spanning_tree": trace.spanning_tree,
        "edges": len(trace.forest.edges),
    }
    lines.append(json.dumps(summary, sort_keys=True))
    return "\n".join(lines) + "\n"


def trace_from_jsonl(text: str) -> tuple[list[StepRecord], dict]:
    """Parse trace text into its records and the summary object."""
    records, summary = [], None
    for n, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ValueError(f"line {n}: {exc}") from None
        if obj.get("summary"):
            if obj.get("version") != 1:
                raise ValueError("unsupported trace format version")
            summary = obj
        else:
            records.append(record_from_json(obj))
    if summary is None:
        raise ValueError("trace has no summary line")
    return records, summary
