"""Deterministic discrete-event driver for the schedulers."""
from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Optional

from .classic import SchedulerConfig
from .dag import ComputationDag
from .numaws import make_scheduler
from .topology import MemoryState, Topology


class SimulationError(RuntimeError):
    pass


@dataclass
class SimResult:
    makespan: int
    events: list
    scheduler: object = field(repr=False)
    steps: int = 0

    @property
    def strand_order(self) -> list:
        return [e[4][0] for e in self.events if e[2] == "strand"]


def simulate(dag: ComputationDag, topology: Topology, config: SchedulerConfig = SchedulerConfig(),
             seed: int = 0, memory: Optional[MemoryState] = None,
             check_invariants: bool = False, max_steps: int = 50_000_000) -> SimResult:
    """Run ``dag`` on a simulated machine.

    Workers are stepped in order of their simulated clocks (ties by worker
    id); a worker keeps stepping at the same instant while its actions cost
    nothing.  The run ends when the root frame returns.
    """
    sched = make_scheduler(dag, topology, config, seed=seed, memory=memory)
    workers = sched.workers
    heap = [(0, w.wid) for w in workers]
    steps = 0
    makespan = None
    while heap:
        now, wid = heapq.heappop(heap)
        w = workers[wid]
        w.clock = now
        cost = sched.step(w)
        steps += 1
        while cost == 0 and not sched.done:
            cost = sched.step(w)
            steps += 1
        if check_invariants:
            sched.verify_invariants()
        if sched.done:
            makespan = now
            break
        if steps > max_steps:
            raise SimulationError(f"no completion after {steps} steps")
        heapq.heappush(heap, (now + cost, wid))
    if makespan is None:
        raise SimulationError("simulation ended without the root returning")
    return SimResult(makespan, sched.events(), sched, steps)
