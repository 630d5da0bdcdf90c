"""Classic continuation-stealing work-stealing scheduler.

The scheduler is a state machine over workers: :meth:`ClassicScheduler.step`
performs one atomic action for one worker (run a strand, spawn, sync,
return, check the parent, or one steal attempt) and records trace events.
Drivers decide when each worker steps: the discrete-event simulator orders
steps by a simulated clock, the thread runner lets every worker step
concurrently.
"""
from __future__ import annotations

import random
import threading
from dataclasses import dataclass, asdict
from typing import Optional

import numpy as np

from .dag import WORK, SPAWN, SYNC, LOCALITY, RETURN, NO_PARENT, ComputationDag
from .deque import Mailbox, WorkDeque
from .topology import MemoryState, Topology

STEAL = "steal"
CHECK_PARENT = "check_parent"

WORK_TIME = "work"
SCHED_TIME = "scheduling"
IDLE_TIME = "idle"

# every trace event kind belongs to exactly one time category
EVENT_CATEGORY = {
    "strand": WORK_TIME,
    "spawn": WORK_TIME,
    "sync": WORK_TIME,
    "return": WORK_TIME,
    "return_stolen": WORK_TIME,
    "sync_ok": SCHED_TIME,
    "suspend": SCHED_TIME,
    "check_parent": SCHED_TIME,
    "resume": SCHED_TIME,
    "steal": SCHED_TIME,
    "promote": SCHED_TIME,
    "mailbox_steal": SCHED_TIME,
    "mailbox_pop": SCHED_TIME,
    "push_event": SCHED_TIME,
    "push_attempt": SCHED_TIME,
    "push_success": SCHED_TIME,
    "steal_fail": IDLE_TIME,
    "coin": IDLE_TIME,
}
_PRIORITY = {WORK_TIME: 0, IDLE_TIME: 1, SCHED_TIME: 2}


class InvariantError(AssertionError):
    pass


@dataclass(frozen=True)
class SchedulerConfig:
    kind: str = "classic"
    local_bias: float = 0.7
    push_threshold: int = 4
    spawn_cost: int = 0
    steal_cost: int = 1
    promote_cost: int = 10
    sync_cost: int = 1
    check_parent_cost: int = 1
    push_cost: int = 1
    mailbox_cost: int = 1

    def __post_init__(self):
        if self.kind not in ("classic", "numaws"):
            raise ValueError(f"unknown scheduler {self.kind!r}")
        if not 0.0 <= self.local_bias <= 1.0:
            raise ValueError("local_bias must lie in [0, 1]")
        if self.push_threshold < 1:
            raise ValueError("push_threshold must be >= 1")
        if self.steal_cost < 1:
            raise ValueError("steal_cost must be >= 1 so idle time advances the clock")

    def as_dict(self):
        return asdict(self)


class RtFrame:
    """Run-time state of one frame: shadow until stolen, full afterwards."""

    __slots__ = ("fid", "body", "pc", "place", "parent", "stolen", "full",
                 "suspended", "outstanding", "lock")

    def __init__(self, node, parent):
        self.fid = node.fid
        self.body = node.body
        self.pc = 0
        self.place = node.place
        self.parent = parent
        self.stolen = False
        self.full = False
        self.suspended = False
        self.outstanding = 0
        self.lock = threading.Lock()

    def __repr__(self):
        kind = "full" if self.full else "shadow"
        return f"<{kind} frame {self.fid} pc={self.pc}>"


class Worker:
    __slots__ = ("wid", "place", "deque", "mailbox", "rng", "frame", "next_action",
                 "returning", "clock", "acc", "events", "step_category")

    def __init__(self, wid, place, rng):
        self.wid = wid
        self.place = place
        self.deque = WorkDeque()
        self.mailbox = Mailbox()
        self.rng = rng
        self.frame = None
        self.next_action = STEAL
        self.returning = None
        self.clock = 0
        self.acc = 0
        self.events = []
        self.step_category = WORK_TIME


def worker_rngs(seed: int, count: int) -> list:
    """Independent per-worker generators derived from one seed."""
    children = np.random.SeedSequence(seed).spawn(count)
    return [random.Random(int(c.generate_state(1, dtype=np.uint64)[0])) for c in children]


class ClassicScheduler:
    name = "classic"

    def __init__(self, dag: ComputationDag, topology: Topology, config: SchedulerConfig,
                 seed: int = 0, memory: Optional[MemoryState] = None):
        self.dag = dag
        self.topology = topology
        self.config = config
        self.memory = memory
        self.strands = dag.strands
        self.frames = []
        for node in dag.frames:
            parent = None if node.parent == NO_PARENT else self.frames[node.parent]
            self.frames.append(RtFrame(node, parent))
        self.workers = [Worker(i, topology.place_of(i), rng)
                        for i, rng in enumerate(worker_rngs(seed, topology.workers))]
        self.workers[0].frame = self.frames[dag.root]
        self.done = False
        self.promoted = []          # full frames never revert, so checks only need these

    # -- tracing ------------------------------------------------------------

    def emit(self, w: Worker, kind: str, cost: int = 0, detail=None):
        w.events.append((w.clock + w.acc, w.wid, kind, cost, detail))
        w.acc += cost
        cat = EVENT_CATEGORY[kind]
        if _PRIORITY[cat] > _PRIORITY[w.step_category]:
            w.step_category = cat

    def events(self) -> list:
        merged = [e for w in self.workers for e in w.events]
        merged.sort(key=lambda e: (e[0], e[1]))
        return merged

    # -- driver entry point -------------------------------------------------

    def step(self, w: Worker) -> int:
        """Perform one atomic action for ``w`` and return its cost."""
        w.acc = 0
        w.step_category = WORK_TIME
        f = w.frame
        if f is None:
            self.schedule(w)
        else:
            self.execute(w, f)
        return w.acc

    def execute(self, w: Worker, f: RtFrame):
        op = f.body[f.pc]
        kind = op[0]
        if kind == WORK:
            f.pc += 1
            self.run_strand(w, self.strands[op[1]])
        elif kind == SPAWN:
            f.pc += 1
            self.on_spawn(w, f, self.frames[op[1]])
        elif kind == SYNC:
            f.pc += 1
            self.on_sync(w, f)
        elif kind == LOCALITY:
            f.pc += 1
            f.place = op[1]
        elif kind == RETURN:
            self.on_return(w, f)

    def run_strand(self, w: Worker, strand):
        cost = strand.duration
        remote = local = 0
        if self.memory is not None:
            access = self.memory.classify_access
            for block in strand.blocks:
                cls, c = access(w.place, block)
                cost += c
                if cls.remote:
                    remote += 1
                else:
                    local += 1
        if strand.action is not None:
            strand.action()
        self.emit(w, "strand", cost, (strand.sid, remote, local))

    # -- the four scheduler operations ---------------------------------------

    def on_spawn(self, w: Worker, f: RtFrame, child: RtFrame):
        w.deque.push_bottom(f)      # f's continuation becomes stealable
        w.frame = child
        self.emit(w, "spawn", self.config.spawn_cost, child.fid)

    def on_return(self, w: Worker, f: RtFrame):
        parent = f.parent
        if parent is None:
            self.emit(w, "return", 0, f.fid)
            w.frame = None
            self.done = True
            return
        popped = w.deque.pop_bottom()
        if popped:
            if popped is not parent:
                raise InvariantError(f"popped {popped} while returning from {f}")
            w.frame = parent
            self.emit(w, "return", 0, f.fid)
        else:
            w.frame = None
            w.returning = f
            w.next_action = CHECK_PARENT
            self.emit(w, "return_stolen", 0, f.fid)

    def on_sync(self, w: Worker, f: RtFrame):
        if not f.stolen:
            self.emit(w, "sync", 0, f.fid)
            return
        with f.lock:
            ok = f.outstanding == 0
            if ok:
                f.stolen = False
            else:
                f.suspended = True
        if ok:
            self.emit(w, "sync_ok", self.config.sync_cost, f.fid)
            self.after_nontrivial_sync(w, f)
        else:
            # the last returning child now owns f; do not touch it again
            w.frame = None
            w.next_action = STEAL
            self.emit(w, "suspend", self.config.sync_cost, f.fid)

    def after_nontrivial_sync(self, w: Worker, f: RtFrame):
        pass

    def check_parent(self, w: Worker) -> Optional[RtFrame]:
        child, w.returning = w.returning, None
        parent = child.parent
        with parent.lock:
            parent.outstanding -= 1
            if parent.outstanding < 0:
                raise InvariantError(f"negative join count on {parent}")
            ready = parent.outstanding == 0 and parent.suspended
            if ready:
                parent.suspended = False
                parent.stolen = False
        self.emit(w, "check_parent", self.config.check_parent_cost, (parent.fid, ready))
        return parent if ready else None

    def promote(self, f: RtFrame):
        """Runs under the victim's deque lock when ``f`` is stolen."""
        with f.lock:
            if not f.full:
                if f.parent is not None and not f.parent.full:
                    raise InvariantError(f"promoting {f} whose parent is a shadow frame")
                f.full = True
                self.promoted.append(f)
            f.stolen = True
            f.outstanding += 1      # the child still running on the victim

    def steal_from(self, w: Worker, victim: int) -> Optional[RtFrame]:
        f = self.workers[victim].deque.steal_top(self.promote)
        if not f:
            self.emit(w, "steal_fail", self.config.steal_cost, victim)
            return None
        self.emit(w, "steal", self.config.steal_cost, (victim, f.fid))
        self.emit(w, "promote", self.config.promote_cost, f.fid)
        return f

    def random_steal(self, w: Worker) -> Optional[RtFrame]:
        P = len(self.workers)
        if P < 2:
            self.emit(w, "steal_fail", self.config.steal_cost, -1)
            return None
        victim = w.rng.randrange(P - 1)
        if victim >= w.wid:
            victim += 1
        return self.steal_from(w, victim)

    def resume(self, w: Worker, f: RtFrame):
        w.frame = f
        self.emit(w, "resume", 0, f.fid)

    def schedule(self, w: Worker):
        """One iteration of the scheduling loop."""
        if w.next_action == CHECK_PARENT:
            w.next_action = STEAL
            parent = self.check_parent(w)
            if parent is not None:
                self.resume(w, parent)
            return
        f = self.random_steal(w)
        if f is not None:
            self.resume(w, f)

    # -- checks ------------------------------------------------------------

    def verify_invariants(self):
        for f in self.promoted:
            if f.full and f.parent is not None and not f.parent.full:
                raise InvariantError(f"{f} is full but its parent is not")
            if f.outstanding < 0:
                raise InvariantError(f"{f} has negative join count")
            if f.suspended and f.outstanding == 0:
                raise InvariantError(f"{f} suspended with nothing outstanding")
        seen = set()
        for w in self.workers:
            for f in w.deque.snapshot():
                if f.fid in seen:
                    raise InvariantError(f"frame {f.fid} queued twice")
                seen.add(f.fid)
            if w.mailbox.slot is not None:
                fid = w.mailbox.slot.fid
                if fid in seen:
                    raise InvariantError(f"frame {fid} both queued and mailed")
                seen.add(fid)
