"""Shared corpus for the spanning-tree suite: every couple up to six internal nodes plus seeded random ones.

Couples that induce the same molecule (same trees and the same sorted
leaf-pair endpoints) are reduced once.  Within one molecule, a policy is
only run when no earlier run already followed its choice sequence: the
engine is deterministic apart from checkpoint choices, so a policy whose
bit stream starts with a finished run's choices would repeat that run.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from molred.couple import enumerate_couples, random_couple
from molred.molecule import molecule_from_couple, molecule_key
from molred.reduction import First, Random, ReductionConfig, Second, run_reduction

CONFIG = ReductionConfig(allow_initial_triple_bonds=True)
RANDOM_SEEDS = (1, 2, 3)
POLICIES = [("first", First()), ("second", Second())] + [(f"random{s}", Random(s)) for s in RANDOM_SEEDS]
MAX_INTERNAL = 6
RANDOM_COUPLES = 500
RANDOM_MAX = 20


def _bits(policy, length: int) -> tuple[int, ...]:
    """Choice indices the policy makes at its first ``length`` two-way checkpoints."""
    if isinstance(policy, First):
        return (0,) * length
    if isinstance(policy, Second):
        return (1,) * length
    rng = random.Random(policy.seed)
    return tuple(rng.randrange(2) for _ in range(length))


# runs take at most two steps per atom, so 256 choices covers every corpus molecule
STREAMS = {name: _bits(pol, 256) for name, pol in POLICIES}


_TAG = {"first": 0, "second": 1}


@dataclass
class Entry:
    source: str
    molecule: object
    traces: list = field(default_factory=list)  # distinct traces
    policy_trace: dict = field(default_factory=dict)  # policy name -> index into traces
    error: str = ""


def reduce_all_policies(molecule, source: str) -> Entry:
    entry = Entry(source, molecule)
    done: list[tuple[tuple[int, ...], int]] = []
    for name, pol in POLICIES:
        hit = None
        for choices, idx in done:
            if STREAMS[name][: len(choices)] == choices:
                hit = idx
                break
        if hit is None:
            try:
                tr = run_reduction(molecule, pol, CONFIG)
            except Exception as exc:  # recorded, asserted on by the tests
                entry.error = f"{name}: {type(exc).__name__}: {exc}"
                return entry
            if any(len(r.alternatives) != 2 for r in tr.records if r.checkpoint):
                raise AssertionError("checkpoint with other than two alternatives breaks run sharing")
            choices = tuple(_TAG[r.checkpoint] for r in tr.records if r.checkpoint)
            assert len(choices) <= len(STREAMS[name])
            entry.traces.append(tr)
            hit = len(entry.traces) - 1
            done.append((choices, hit))
        entry.policy_trace[name] = hit
    return entry


def random_corpus_couples():
    rng = random.Random(20240611)
    out = []
    for i in range(RANDOM_COUPLES):
        total = rng.randint(2, RANDOM_MAX)
        n_plus = rng.randint(1, total - 1)
        out.append(random_couple(n_plus, total - n_plus, seed=i))
    return out


def iter_molecules(counter: dict, max_internal: int = MAX_INTERNAL):
    """Yield (source, molecule) over the corpus, one distinct molecule at a time.

    ``counter["couples"]`` tracks how many couples have been read so far.
    """
    counter["couples"] = 0
    seen = set()
    for c in enumerate_couples(max_internal, limit=None):
        counter["couples"] += 1
        key = molecule_key(c)
        if key in seen:
            continue
        seen.add(key)
        yield f"enum:{len(seen)}", molecule_from_couple(c, check=False)
    for i, c in enumerate(random_corpus_couples()):
        counter["couples"] += 1
        yield f"random:{i}", molecule_from_couple(c)
