"""Work-stealing runtime models: a classic continuation-stealing scheduler, a
NUMA-aware variant with locality hints, biased stealing and mailbox pushes, a
discrete-event machine simulator with a NUMA cost model, and benchmarks.
"""
from .bench import run, sweep
from .benchmarks import default_spec
from .classic import ClassicScheduler, InvariantError, SchedulerConfig
from .dag import ComputationDag, DagBuilder, WorkSpanReport, build_dag, serial_elide, work_span
from .deque import Mailbox, WorkDeque
from .layout import BlockedLayout, PlacementPolicy, assign_places, blocked_index, morton_decode, morton_encode
from .metrics import RunReport, breakdown, format_table, scalability, spawn_overhead, work_inflation
from .numaws import NumaScheduler, victim_distribution
from .simulator import simulate
from .threads import run_threads
from .topology import ANY, CostModel, MemoryState, Placement, Topology, make_topology

__all__ = [
    "ANY", "BlockedLayout", "ClassicScheduler", "ComputationDag", "CostModel", "DagBuilder",
    "InvariantError", "Mailbox", "MemoryState", "NumaScheduler", "Placement", "PlacementPolicy",
    "RunReport", "SchedulerConfig", "Topology", "WorkDeque", "WorkSpanReport", "assign_places",
    "blocked_index", "breakdown", "build_dag", "default_spec", "format_table", "make_topology", "morton_decode", "morton_encode",
    "run", "run_threads", "scalability", "serial_elide", "simulate", "spawn_overhead", "victim_distribution",
    "sweep", "work_inflation", "work_span",
]
