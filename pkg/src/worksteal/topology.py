"""Machine model: sockets, cores, worker placement and a NUMA memory cost model.

Places are plain socket indices (``0 .. socket_count-1``).  ``ANY`` is a
sentinel that never compares equal to a concrete place.
"""
from __future__ import annotations

import enum
from collections import OrderedDict
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

ANY = -1


def is_concrete(place: int) -> bool:
    return place is not None and place >= 0


def format_place(place: int) -> str:
    return "ANY" if place == ANY else str(place)


def parse_place(text) -> int:
    if isinstance(text, int):
        return text
    text = str(text).strip()
    if text.upper() == "ANY":
        return ANY
    value = int(text)
    if value < 0:
        raise ValueError(f"invalid place {text!r}")
    return value


class TopologyError(ValueError):
    pass


class Placement(str, enum.Enum):
    PACKED = "packed"
    SPREAD = "spread"


@dataclass(frozen=True)
class Topology:
    socket_count: int
    cores_per_socket: int
    workers: int
    placement: Placement
    worker_place: tuple

    @property
    def active_sockets(self) -> int:
        """Number of sockets hosting at least one worker (always a prefix)."""
        return max(self.worker_place) + 1

    def workers_on(self, socket: int) -> list:
        return [w for w, s in enumerate(self.worker_place) if s == socket]

    def place_of(self, worker: int) -> int:
        return self.worker_place[worker]

    def has_workers(self, place: int) -> bool:
        return is_concrete(place) and place < self.active_sockets

    def check_place(self, place: int) -> int:
        if place == ANY:
            return place
        if not isinstance(place, int) or place < 0 or place >= self.socket_count:
            raise TopologyError(f"place {place!r} outside 0..{self.socket_count - 1}")
        return place


def make_topology(socket_count: int, cores_per_socket: int, workers: int,
                  placement=Placement.PACKED) -> Topology:
    placement = Placement(placement)
    for name, value in (("socket_count", socket_count),
                        ("cores_per_socket", cores_per_socket),
                        ("workers", workers)):
        if int(value) != value or value <= 0:
            raise TopologyError(f"{name} must be a positive integer, got {value!r}")
    capacity = socket_count * cores_per_socket
    if workers > capacity:
        raise TopologyError(f"{workers} workers exceed capacity {capacity}")
    if placement is Placement.PACKED:
        places = tuple(w // cores_per_socket for w in range(workers))
    else:
        places = tuple(w % socket_count for w in range(workers))
    return Topology(socket_count, cores_per_socket, workers, placement, places)


class AccessClass(str, enum.Enum):
    LOCAL_LLC = "local_llc"
    REMOTE_LLC = "remote_llc"
    LOCAL_DRAM = "local_dram"
    REMOTE_DRAM = "remote_dram"

    @property
    def remote(self) -> bool:
        return self in (AccessClass.REMOTE_LLC, AccessClass.REMOTE_DRAM)


@dataclass(frozen=True)
class CostModel:
    """Latency table in cycles plus the per-socket LLC capacity in blocks."""

    llc_local: int = 40
    llc_remote: int = 140
    dram_local: int = 140
    dram_remote: int = 300
    llc_capacity: int = 256

    def __post_init__(self):
        if not (self.llc_local <= self.dram_local <= self.dram_remote
                and self.llc_local <= self.llc_remote <= self.dram_remote):
            raise ValueError("cost table violates llc_local <= {dram_local, llc_remote} <= dram_remote")
        if self.llc_capacity < 0:
            raise ValueError("llc_capacity must be >= 0")

    def cost(self, cls: AccessClass) -> int:
        return {
            AccessClass.LOCAL_LLC: self.llc_local,
            AccessClass.REMOTE_LLC: self.llc_remote,
            AccessClass.LOCAL_DRAM: self.dram_local,
            AccessClass.REMOTE_DRAM: self.dram_remote,
        }[cls]

    @classmethod
    def from_mapping(cls, values: Mapping) -> "CostModel":
        known = {k: int(values[k]) for k in cls.__dataclass_fields__ if k in values}
        return cls(**known)


class UnknownBlockError(KeyError):
    pass


class MemoryState:
    """Mutable DRAM-ownership and LLC-residency state for one simulated run.

    ``owners`` gives the DRAM socket of each block; negative entries are
    resolved by first touch.  A block is resident in at most one LLC; a hit
    in another socket's LLC migrates it.
    """

    def __init__(self, topology: Topology, cost: CostModel, n_blocks: int,
                 owners: Optional[Sequence[int]] = None):
        self.topology = topology
        self.cost = cost
        self.n_blocks = int(n_blocks)
        if owners is None:
            self.owners = [ANY] * self.n_blocks
        else:
            if len(owners) != self.n_blocks:
                raise ValueError("owners length does not match n_blocks")
            self.owners = [int(o) if o is not None else ANY for o in owners]
            for o in self.owners:
                if o != ANY:
                    topology.check_place(o)
        self.resident = [ANY] * self.n_blocks
        self.llc = [OrderedDict() for _ in range(topology.socket_count)]
        self.counts = {cls: 0 for cls in AccessClass}
        self._costs = {cls: cost.cost(cls) for cls in AccessClass}

    def _insert(self, socket: int, block: int):
        cache = self.llc[socket]
        if self.cost.llc_capacity == 0:
            return
        if len(cache) >= self.cost.llc_capacity:
            evicted, _ = cache.popitem(last=False)
            self.resident[evicted] = ANY
        cache[block] = None
        self.resident[block] = socket

    def classify_access(self, socket: int, block: int):
        """Classify one access and update residency.  Returns (class, cycles)."""
        if not 0 <= block < self.n_blocks:
            raise UnknownBlockError(block)
        if socket < 0:
            raise TopologyError("accessing worker must sit on a concrete place")
        where = self.resident[block]
        if where == socket:
            self.llc[socket].move_to_end(block)
            cls = AccessClass.LOCAL_LLC
        elif where >= 0:
            del self.llc[where][block]
            self.resident[block] = ANY
            self._insert(socket, block)
            cls = AccessClass.REMOTE_LLC
        else:
            owner = self.owners[block]
            if owner == ANY:
                owner = self.owners[block] = socket
            cls = AccessClass.LOCAL_DRAM if owner == socket else AccessClass.REMOTE_DRAM
            self._insert(socket, block)
        self.counts[cls] += 1
        return cls, self._costs[cls]
