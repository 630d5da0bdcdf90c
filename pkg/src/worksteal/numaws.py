"""NUMA-aware work stealing: locality-biased victims, coin-flip mailbox probing,
single-entry mailboxes and lazy work pushing.

Pushing happens only at three points, all on full frames: a successful
nontrivial sync, the last child returning to a suspended parent, and a
successful deque steal.  Each push event makes at most ``push_threshold``
deposit attempts and never blocks.
"""
from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from typing import Dict, Optional

from .classic import CHECK_PARENT, STEAL, ClassicScheduler, RtFrame, Worker
from .topology import Topology, is_concrete


@dataclass(frozen=True)
class StealPolicy:
    victims: tuple
    probabilities: tuple

    @property
    def min_probability(self) -> float:
        return min(self.probabilities) if self.probabilities else 0.0

    def as_dict(self) -> Dict[int, float]:
        return dict(zip(self.victims, self.probabilities))

    def c_constant(self, P: int) -> float:
        """Smallest c with every victim probability >= 1/(c P)."""
        p = self.min_probability
        return math.inf if p <= 0 else 1.0 / (P * p)


def victim_distribution(thief: int, topology: Topology, local_bias: float) -> StealPolicy:
    """Same-socket victims share ``local_bias``; remote victims share the rest.

    When one of the two groups is empty the other receives all the mass.
    """
    P = topology.workers
    if P < 2:
        raise ValueError("victim distribution needs at least two workers")
    home = topology.place_of(thief)
    local = [v for v in range(P) if v != thief and topology.place_of(v) == home]
    remote = [v for v in range(P) if topology.place_of(v) != home]
    if not local:
        mass_local, mass_remote = 0.0, 1.0
    elif not remote:
        mass_local, mass_remote = 1.0, 0.0
    else:
        mass_local, mass_remote = local_bias, 1.0 - local_bias
    probs = {}
    for v in local:
        probs[v] = mass_local / len(local)
    for v in remote:
        probs[v] = mass_remote / len(remote)
    victims = tuple(sorted(probs))
    return StealPolicy(victims, tuple(probs[v] for v in victims))


class NumaScheduler(ClassicScheduler):
    name = "numaws"

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.policies = []
        self._cdf = []
        for w in self.workers:
            if len(self.workers) < 2:
                self.policies.append(None)
                self._cdf.append(None)
                continue
            pol = victim_distribution(w.wid, self.topology, self.config.local_bias)
            acc, cdf = 0.0, []
            for p in pol.probabilities:
                acc += p
                cdf.append(acc)
            self.policies.append(pol)
            self._cdf.append(cdf)

    # -- helpers -----------------------------------------------------------

    def is_remote(self, f: RtFrame, w: Worker) -> bool:
        place = f.place
        return is_concrete(place) and place != w.place and self.topology.has_workers(place)

    def pick_victim(self, w: Worker) -> int:
        cdf = self._cdf[w.wid]
        i = bisect.bisect_right(cdf, w.rng.random() * cdf[-1])
        victims = self.policies[w.wid].victims
        return victims[min(i, len(victims) - 1)]

    def push_back(self, w: Worker, f: RtFrame, trigger: str) -> bool:
        """Try to hand ``f`` to a worker on its designated socket."""
        if not self.is_remote(f, w) or not f.full:
            raise ValueError(f"push_back precondition violated for {f} on worker {w.wid}")
        targets = self.topology.workers_on(f.place)
        chosen = w.rng.sample(targets, min(self.config.push_threshold, len(targets)))
        self.emit(w, "push_event", 0, (trigger, f.fid))
        for t in chosen:
            self.emit(w, "push_attempt", self.config.push_cost, t)
            if self.workers[t].mailbox.deposit(f):
                self.emit(w, "push_success", 0, (t, f.fid))
                return True
        return False

    # -- overridden operations -------------------------------------------

    def after_nontrivial_sync(self, w: Worker, f: RtFrame):
        if self.is_remote(f, w) and self.push_back(w, f, "sync"):
            w.frame = None
            w.next_action = STEAL

    def biased_steal_with_push(self, w: Worker) -> Optional[RtFrame]:
        if len(self.workers) < 2:
            self.emit(w, "steal_fail", self.config.steal_cost, -1)
            return None
        victim = self.pick_victim(w)
        mailbox_first = w.rng.random() < 0.5
        self.emit(w, "coin", 0, mailbox_first)
        if mailbox_first:
            f = self.workers[victim].mailbox.take()
            if f is not None:
                self.emit(w, "mailbox_steal", self.config.steal_cost, (victim, f.fid))
                return f
        f = self.steal_from(w, victim)
        if f is None:
            return None
        if self.is_remote(f, w) and self.push_back(w, f, "steal"):
            return None
        return f

    def pop_mailbox(self, w: Worker) -> Optional[RtFrame]:
        f = w.mailbox.take()
        if f is not None:
            self.emit(w, "mailbox_pop", self.config.mailbox_cost, f.fid)
        return f

    def check_parent_numa(self, w: Worker) -> Optional[RtFrame]:
        parent = self.check_parent(w)
        if parent is not None and self.is_remote(parent, w):
            if self.push_back(w, parent, "return"):
                return None
        return parent

    def schedule(self, w: Worker):
        if w.next_action == CHECK_PARENT:
            w.next_action = STEAL
            parent = self.check_parent_numa(w)
            if parent is not None:
                self.resume(w, parent)
            return
        f = self.pop_mailbox(w)
        if f is None:
            f = self.biased_steal_with_push(w)
        if f is not None:
            self.resume(w, f)


def make_scheduler(dag, topology, config, seed=0, memory=None):
    cls = NumaScheduler if config.kind == "numaws" else ClassicScheduler
    return cls(dag, topology, config, seed=seed, memory=memory)
