"""Work deque and single-slot mailbox.

The deque follows the owner-bottom / thief-top discipline with an owner fast
path that never touches the lock unless the owner and a thief may be after
the same element (the THE scheme).  Each operation is written as a generator
that yields immediately before every access to shared state; ordinary calls
drive the generator to completion, while :func:`explore_interleavings`
schedules the yields of several participants against each other to enumerate
every interleaving of a small race.
"""
from __future__ import annotations

import threading
import time
from typing import Callable, Iterator, List, Optional, Sequence


class _Token:
    __slots__ = ("name",)

    def __init__(self, name):
        self.name = name

    def __repr__(self):
        return self.name

    def __bool__(self):
        return False


EMPTY = _Token("EMPTY")
ABORT = _Token("ABORT")
LOST = _Token("LOST")       # owner lost the last element to a thief

STEP = _Token("STEP")
SPIN = _Token("SPIN")       # blocked on a lock; retry only once it is free


def drive(gen: Iterator):
    """Run a step generator to completion, yielding the GIL while spinning."""
    try:
        while True:
            if next(gen) is SPIN:
                time.sleep(0)
    except StopIteration as stop:
        return stop.value


class WorkDeque:
    """Growable deque of frames; one owner, any number of thieves."""

    def __init__(self):
        self.items: list = []
        self.head = 0     # next slot a thief takes
        self.tail = 0     # next slot the owner fills
        self.lock = threading.Lock()
        self.owner_lock_acquisitions = 0

    def __len__(self):
        return max(0, self.tail - self.head)

    def snapshot(self) -> list:
        return self.items[self.head:self.tail]

    # -- step generators ----------------------------------------------------

    def push_steps(self, item):
        yield STEP
        t = self.tail
        if t == len(self.items):
            self.items.append(item)
        else:
            self.items[t] = item
        yield STEP
        self.tail = t + 1

    def _acquire_steps(self):
        while not self.lock.acquire(False):
            yield SPIN

    def pop_steps(self):
        yield STEP
        t = self.tail
        yield STEP
        if self.head >= t:
            return EMPTY
        t -= 1
        yield STEP
        self.tail = t
        yield STEP
        if self.head > t:
            # a thief may be taking the same element; settle it under the lock
            yield STEP
            self.tail = t + 1
            yield from self._acquire_steps()
            self.owner_lock_acquisitions += 1
            yield STEP
            self.tail = t
            yield STEP
            if self.head > t:
                self.tail = t + 1
                self.head = self.tail = 0
                self.lock.release()
                return LOST
            item = self.items[t]
            self.lock.release()
            return item
        yield STEP
        return self.items[t]

    def steal_steps(self, on_steal: Optional[Callable] = None):
        yield STEP
        if not self.lock.acquire(False):
            return ABORT
        yield STEP
        h = self.head + 1
        self.head = h
        yield STEP
        if h > self.tail:
            yield STEP
            self.head = h - 1
            self.lock.release()
            return EMPTY
        item = self.items[h - 1]
        if on_steal is not None:
            on_steal(item)
        yield STEP
        self.lock.release()
        return item

    # -- plain calls ----------------------------------------------------------

    def push_bottom(self, item) -> None:
        t = self.tail
        if t == len(self.items):
            self.items.append(item)
        else:
            self.items[t] = item
        self.tail = t + 1

    def pop_bottom(self):
        return drive(self.pop_steps())

    def steal_top(self, on_steal: Optional[Callable] = None):
        """Take the oldest item.  ``on_steal(item)`` runs while the thief still
        holds the deque lock, before the owner can observe the removal."""
        return drive(self.steal_steps(on_steal))


class Mailbox:
    """Single-slot, multi-producer / single-consumer hand-off cell."""

    def __init__(self):
        self.slot = None
        self._lock = threading.Lock()

    def __bool__(self):
        return self.slot is not None

    def deposit_steps(self, item):
        yield STEP
        with self._lock:
            if self.slot is not None:
                return False
            self.slot = item
            return True

    def take_steps(self):
        yield STEP
        with self._lock:
            item, self.slot = self.slot, None
            return item

    def deposit(self, item) -> bool:
        """Claim the empty slot; False if it is occupied."""
        if item is None:
            raise ValueError("cannot deposit None")
        with self._lock:
            if self.slot is not None:
                return False
            self.slot = item
            return True

    def take(self):
        with self._lock:
            item, self.slot = self.slot, None
            return item


# -- interleaving exploration ------------------------------------------------

class InterleavingDeadlock(RuntimeError):
    pass


def explore_interleavings(make_scenario: Callable[[], tuple], limit: int = 5_000_000) -> List[tuple]:
    """Enumerate every interleaving of a small race.

    ``make_scenario()`` returns ``(state, participants, finish)`` where
    ``participants`` are fresh step generators over ``state`` and
    ``finish(state, results)`` summarizes a completed run.  A participant
    that last yielded :data:`SPIN` is only rescheduled if its lock is free,
    which is observed by ``state.lock``.

    Returns one summary per complete schedule.
    """
    outcomes: list = []

    def fresh(prefix):
        state, gens, finish = make_scenario()
        run = _Run(state, gens, finish)
        for i in prefix:
            run.step(i)
        return run

    count = 0
    stack = [((), None)]
    while stack:
        prefix, run = stack.pop()
        if run is None:
            run = fresh(prefix)
        enabled = run.enabled()
        if not enabled:
            if not run.all_done():
                raise InterleavingDeadlock(f"schedule {prefix} is stuck")
            outcomes.append(run.finish(run.state, list(run.results)))
            count += 1
            if count > limit:
                raise RuntimeError("interleaving limit exceeded")
            continue
        # siblings replay from scratch; the first child reuses the live run
        for i in reversed(enabled[1:]):
            stack.append((prefix + (i,), None))
        run.step(enabled[0])
        stack.append((prefix + (enabled[0],), run))
    return outcomes


class _Run:
    def __init__(self, state, gens: Sequence, finish):
        self.state = state
        self.gens = list(gens)
        self.finish = finish
        self.results = [None] * len(gens)
        self.done = [False] * len(gens)
        self.last = [STEP] * len(gens)
        for i in range(len(gens)):
            self.step(i)

    def step(self, i):
        try:
            self.last[i] = next(self.gens[i])
        except StopIteration as stop:
            self.done[i] = True
            self.results[i] = stop.value

    def enabled(self) -> list:
        lock = getattr(self.state, "lock", None)
        out = []
        for i, finished in enumerate(self.done):
            if finished:
                continue
            if self.last[i] is SPIN and lock is not None and lock.locked():
                continue
            out.append(i)
        return out

    def all_done(self):
        return all(self.done)
