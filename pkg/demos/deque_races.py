"""Enumerate every interleaving of an owner pop racing two thieves.

Deque operations are written as step generators, so a race can be explored
exhaustively instead of hoping a stress test hits the bad schedule.

    python demos/deque_races.py
"""
from collections import Counter

from worksteal.deque import WorkDeque, explore_interleavings


def scenario():
    d = WorkDeque()
    d.push_bottom("A")
    d.push_bottom("B")
    gens = [d.pop_steps(), d.steal_steps(), d.steal_steps()]
    return d, gens, lambda state, results: (tuple(map(str, results)), tuple(state.snapshot()))


if __name__ == "__main__":
    outcomes = explore_interleavings(scenario)
    print(f"{len(outcomes)} schedules explored")
    for (results, left), count in Counter(outcomes).most_common():
        print(f"{count:6d} x  owner, thief 1, thief 2 -> {results}; left in deque: {list(left)}")
