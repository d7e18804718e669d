"""Reduce every couple up to N internal nodes and tally step kinds and classes.

Usage: ``python demos/corpus_stats.py [N]`` (default 4; 6 takes a few minutes).
"""

import sys
from collections import Counter

from molred.couple import enumerate_couples
from molred.molecule import molecule_from_couple, molecule_key
from molred.reduction import First, ReductionConfig, Second, ledger_check, run_reduction


def main(n: int):
    config = ReductionConfig(allow_initial_triple_bonds=True)
    kinds, classes = Counter(), Counter()
    couples = molecules = trees = 0
    seen = set()
    for c in enumerate_couples(n, limit=None):
        couples += 1
        key = molecule_key(c)
        if key in seen:
            continue
        seen.add(key)
        molecules += 1
        m = molecule_from_couple(c, check=False)
        for policy in (First(), Second()):
            tr = run_reduction(m, policy, config)
            trees += tr.spanning_tree
            kinds.update(r.kind.value for r in tr.records)
            classes.update(ledger_check(tr).classes)
    print(f"{couples} couples, {molecules} distinct molecules, {trees}/{2 * molecules} runs ended in a spanning tree")
    print("classes:", dict(classes))
    for kind, count in sorted(kinds.items(), key=lambda kv: -kv[1]):
        print(f"  {kind:8s} {count}")


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 4)
