"""Seeded random series-parallel computations for scheduler bound checks."""
from __future__ import annotations

import random

from .dag import ComputationDag, DagBuilder


def random_fork_join(seed: int, target_work: int = 100_000, leaf_work: tuple = (8, 64),
                     max_fanout: int = 4, serial_work: tuple = (1, 2)) -> ComputationDag:
    """Random nested spawn/sync program with total work close to ``target_work``.

    Each frame either becomes a leaf strand (when its budget is small) or
    splits its budget among 2..``max_fanout`` spawned children, with short
    serial strands before each spawn and after the sync.
    """
    rng = random.Random(seed)

    def body(b: DagBuilder, budget: int):
        lo, hi = leaf_work
        if budget <= hi:
            b.work(max(1, budget))
            return
        fan = rng.randint(2, max_fanout)
        cuts = [rng.uniform(0.5, 1.0) for _ in range(fan)]
        weights = [c / sum(cuts) for c in cuts]
        overhead = 0
        shares = []
        for w in weights:
            s = rng.randint(*serial_work)
            overhead += s
            shares.append((s, int(budget * w)))
        tail = rng.randint(*serial_work)
        scale = max(0.0, (budget - overhead - tail)) / max(1, sum(x for _, x in shares))
        for s, share in shares:
            b.work(s)
            b.spawn(body, max(lo, int(share * scale)))
        b.sync()
        b.work(tail)

    return DagBuilder().build(body, target_work)
