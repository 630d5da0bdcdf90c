"""Real-thread driver: one OS thread per worker, wall-clock accounting.

Every worker steps concurrently; cross-worker interaction goes through the
deque, mailbox and per-frame locks exactly as in the simulator.  Event costs
are replaced by measured seconds, attributed to the step's category.
"""
from __future__ import annotations

import threading
import time
from dataclasses import dataclass, field

from .classic import EVENT_CATEGORY, SchedulerConfig
from .dag import ComputationDag
from .numaws import make_scheduler
from .topology import Topology


@dataclass
class ThreadResult:
    makespan: float
    events: list
    scheduler: object = field(repr=False)

    @property
    def strand_order(self) -> list:
        return [e[4][0] for e in self.events if e[2] == "strand"]


def run_threads(dag: ComputationDag, topology: Topology, config: SchedulerConfig = SchedulerConfig(),
                seed: int = 0, timeout: float = 600.0) -> ThreadResult:
    sched = make_scheduler(dag, topology, config, seed=seed, memory=None)
    errors = []
    clock = time.perf_counter
    start = clock()
    finished = [None]

    def loop(w):
        try:
            while not sched.done:
                t0 = clock()
                w.clock = t0 - start
                n0 = len(w.events)
                sched.step(w)
                t1 = clock()
                if sched.done and finished[0] is None and w.frame is None:
                    finished[0] = t1 - start
                _retime(w.events, n0, w.clock, t1 - t0, w.step_category)
                if w.frame is None:
                    time.sleep(0)
        except BaseException as exc:    # surfaced in the caller
            errors.append(exc)
            sched.done = True

    threads = [threading.Thread(target=loop, args=(w,), name=f"worker-{w.wid}", daemon=True)
               for w in sched.workers]
    for t in threads:
        t.start()
    deadline = start + timeout
    for t in threads:
        t.join(max(0.0, deadline - clock()))
        if t.is_alive():
            sched.done = True
            raise TimeoutError("thread run exceeded its timeout")
    if errors:
        raise errors[0]
    makespan = finished[0] if finished[0] is not None else clock() - start
    return ThreadResult(makespan, sched.events(), sched)


def _retime(events, n0, t0, elapsed, category):
    """Give the step's wall time to its first event of the step's category."""
    charged = False
    for i in range(n0, len(events)):
        ts, wid, kind, _, detail = events[i]
        cost = 0.0
        if not charged and EVENT_CATEGORY[kind] == category:
            cost = elapsed
            charged = True
        events[i] = (t0, wid, kind, cost, detail)
