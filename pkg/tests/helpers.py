"""Shared fixtures for the test modules: small benchmark sizes and deque races."""
import random
import threading
from collections import Counter

from worksteal.benchmarks import default_spec
from worksteal.deque import ABORT, EMPTY, LOST, WorkDeque

SMALL = {
    "cilksort": dict(n=4096, base_case=256),
    "heat": dict(n=64, base_case=8),
    "strassen": dict(n=64, base_case=16),
    "lu": dict(n=64, base_case=8),
    "scan": dict(n=4096, base_case=256),
    "cg_lite": dict(n=1024, base_case=64),
}

FAILURES = (EMPTY, ABORT, LOST)


def small_spec(name, **overrides):
    kw = dict(SMALL[name])
    kw.update(overrides)
    return default_spec(name, **kw)


def filled(*items):
    d = WorkDeque()
    for it in items:
        d.push_bottom(it)
    return d


def sequence(*gens):
    """Run several step generators back to back as one participant."""
    out = []
    for g in gens:
        out.append((yield from g))
    return out


def delivered(results):
    """Frames actually handed out, flattening sequenced participants."""
    got = []
    for r in results:
        for x in (r if isinstance(r, list) else [r]):
            if isinstance(x, str):
                got.append(x)
    return got


def deque_races():
    """Named race scenarios of up to three participants over string frames.

    Each value is ``(make_scenario, frames pushed in total)``.
    """
    def owner_vs_thief():
        d = filled("A")
        return d, [d.pop_steps(), d.steal_steps()], _summary

    def two_thieves():
        d = filled("A")
        return d, [d.steal_steps(), d.steal_steps()], _summary

    def owner_two_thieves(size):
        def make():
            d = filled(*[f"f{i}" for i in range(size)])
            owner = sequence(d.pop_steps(), d.pop_steps())
            return d, [owner, d.steal_steps(), d.steal_steps()], _summary
        return make

    def push_pop_vs_thieves():
        d = filled("A")
        owner = sequence(d.push_steps("B"), d.pop_steps(), d.pop_steps())
        return d, [owner, d.steal_steps(), d.steal_steps()], _summary

    races = {
        "pop-vs-steal": (owner_vs_thief, ["A"]),
        "steal-vs-steal": (two_thieves, ["A"]),
        "push-pop-vs-2-thieves": (push_pop_vs_thieves, ["A", "B"]),
    }
    for size in (1, 2, 3):
        races[f"2pop-vs-2-thieves/{size}"] = (owner_two_thieves(size), [f"f{i}" for i in range(size)])
    return races


def _summary(state, results):
    return state.snapshot(), delivered(results), results


def stress_deques(owners=4, thieves=8, total_ops=1_000_000, seed=0):
    """Owners push/pop their own deques while thieves steal at random.

    Returns (pushed multiset, returned-or-left multiset, ops performed).
    """
    deques = [WorkDeque() for _ in range(owners)]
    per_owner = total_ops * 2 // 3 // owners
    per_thief = total_ops // 3 // thieves
    pushed = [[] for _ in range(owners)]
    got = [[] for _ in range(owners + thieves)]

    def owner(i):
        rng = random.Random(seed * 1000 + i)
        d, out, mine = deques[i], got[i], pushed[i]
        for serial in range(per_owner):
            if rng.random() < 0.55:
                item = (i, serial)
                mine.append(item)
                d.push_bottom(item)
            else:
                r = d.pop_bottom()
                if r not in FAILURES:
                    out.append(r)
        while True:
            r = d.pop_bottom()
            if r is EMPTY or r is LOST:
                break
            out.append(r)

    def thief(j):
        rng = random.Random(seed * 1000 + 100 + j)
        out = got[owners + j]
        for _ in range(per_thief):
            r = deques[rng.randrange(owners)].steal_top()
            if r not in FAILURES:
                out.append(r)

    threads = [threading.Thread(target=owner, args=(i,)) for i in range(owners)]
    threads += [threading.Thread(target=thief, args=(j,)) for j in range(thieves)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    leftover = [x for d in deques for x in d.snapshot()]
    returned = Counter(x for out in got for x in out) + Counter(leftover)
    return Counter(x for p in pushed for x in p), returned, owners * per_owner + thieves * per_thief
