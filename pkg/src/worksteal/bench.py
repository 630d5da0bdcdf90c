"""Benchmark harness: single runs with oracle checks, and parameter sweeps."""
from __future__ import annotations

import csv
import io
import itertools
import statistics
import time
from dataclasses import dataclass, field, replace
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .benchmarks import BenchmarkSpec, Hints, build
from .classic import SchedulerConfig
from .dag import serial_elide, work_span
from .layout import PlacementPolicy, PolicyKind, assign_places
from .metrics import RunReport, breakdown
from .simulator import simulate
from .threads import run_threads
from .topology import ANY, CostModel, MemoryState, Topology, make_topology

MODES = ("sim", "threads")


class OracleMismatch(RuntimeError):
    """The benchmark produced a wrong answer.  Carries the finished result."""

    def __init__(self, result: "RunResult"):
        cfg = result.report.config
        super().__init__(f"{cfg.get('bench')} output failed its oracle check "
                         f"(scheduler={cfg.get('scheduler')}, P={cfg.get('P')}, seed={cfg.get('seed')})")
        self.result = result


@dataclass
class RunResult:
    report: RunReport
    checksum: str
    correct: bool
    events: list = field(default_factory=list, repr=False)
    per_worker: list = field(default_factory=list, repr=False)


@dataclass(frozen=True)
class Placement:
    """How data blocks get their DRAM owners.

    ``ranges`` overrides the benchmark's own top-level partitions when the
    policy is partitioned.
    """

    policy: str = "first-touch"
    ranges: Tuple[Tuple[int, int, int], ...] = ()

    def __post_init__(self):
        PolicyKind(self.policy)


def resolve_owners(inst, spec: BenchmarkSpec, topology: Topology, placement: Placement) -> list:
    kind = PolicyKind(placement.policy)
    if kind is PolicyKind.FIRST_TOUCH:
        policy = PlacementPolicy.first_touch()
    elif kind is PolicyKind.INTERLEAVE:
        policy = PlacementPolicy.interleave()
    else:
        if placement.ranges:
            ranges = placement.ranges
        else:
            hints = Hints(spec, topology.active_sockets)
            ranges = [(a, z, hints.partition_place(q)) for a, z, q in inst.partitions]
        # partitions aimed at sockets without workers fall back to first touch
        ranges = [(a, z, p if topology.has_workers(p) else ANY) for a, z, p in ranges]
        policy = PlacementPolicy.partitioned(ranges)
    return assign_places(inst.n_blocks, policy, topology)


_T1_CACHE: Dict[tuple, float] = {}


def _serial_time(spec, topology, mode, cost_model, placement) -> float:
    if mode == "threads":
        inst = build(spec, 1)
        t0 = time.perf_counter()
        serial_elide(inst.dag, run_actions=True)
        return time.perf_counter() - t0
    single = make_topology(topology.socket_count, topology.cores_per_socket, 1, topology.placement)
    inst = build(spec, 1)
    if cost_model is None:
        return serial_elide(inst.dag, run_actions=False).cost
    memory = MemoryState(single, cost_model, inst.n_blocks, resolve_owners(inst, spec, single, placement))
    place = single.place_of(0)

    def cost(strand):
        return strand.duration + sum(memory.classify_access(place, b)[1] for b in strand.blocks)
    return serial_elide(inst.dag, cost_fn=cost, run_actions=False).cost


def _execute(spec, topology, config, mode, seed, cost_model, placement, check_invariants):
    inst = build(spec, topology.active_sockets)
    if mode == "sim":
        memory = None
        if cost_model is not None:
            memory = MemoryState(topology, cost_model, inst.n_blocks,
                                 resolve_owners(inst, spec, topology, placement))
        res = simulate(inst.dag, topology, config, seed=seed, memory=memory,
                       check_invariants=check_invariants)
    else:
        res = run_threads(inst.dag, topology, config, seed=seed)
    return inst, res


def run(spec: BenchmarkSpec, topology: Topology, config: SchedulerConfig = SchedulerConfig(),
        mode: str = "sim", seed: int = 0, cost_model: Optional[CostModel] = CostModel(),
        placement: Placement = Placement(), check_invariants: bool = False,
        keep_events: bool = False) -> RunResult:
    """Execute one benchmark configuration and verify its output.

    ``T_S`` is the serial elision, ``T_1`` the same scheduler on one worker of
    the same machine, ``T_P`` this run.  In simulator mode repetitions are
    identical, so the run executes once; in thread mode the repetition with
    the median makespan is reported.  Raises :class:`OracleMismatch` if the
    output is wrong.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    if mode == "threads":
        cost_model = None
    reps = spec.reps if mode == "threads" else 1
    runs = [_execute(spec, topology, config, mode, seed, cost_model, placement, check_invariants)
            for _ in range(reps)]
    runs.sort(key=lambda r: r[1].makespan)
    inst, res = runs[len(runs) // 2]

    per_worker, report = breakdown(res.events, topology.workers)
    report.T_P = res.makespan
    report.T_S = _serial_time(spec, topology, mode, cost_model, placement)
    if topology.workers == 1:
        report.T_1 = res.makespan
    else:
        key = (spec, config, cost_model, placement, topology.socket_count,
               topology.cores_per_socket, topology.placement)
        if mode == "sim" and key in _T1_CACHE:
            report.T_1 = _T1_CACHE[key]
        else:
            single = make_topology(topology.socket_count, topology.cores_per_socket, 1, topology.placement)
            report.T_1 = _execute(spec, single, config, mode, seed, cost_model, placement, False)[1].makespan
            if mode == "sim":
                _T1_CACHE[key] = report.T_1
    ws = work_span(inst.dag, config.spawn_cost)
    report.work, report.span = ws.work, ws.span
    report.config = {
        "bench": spec.name, "n": spec.n, "base_case": spec.base_case, "hints": spec.hints,
        "layout": spec.layout, "reps": spec.reps, "scheduler": config.kind, "P": topology.workers,
        "sockets": topology.socket_count, "cores_per_socket": topology.cores_per_socket,
        "active_sockets": topology.active_sockets, "placement": topology.placement.value,
        "placement_policy": placement.policy, "local_bias": config.local_bias,
        "push_threshold": config.push_threshold, "seed": seed, "mode": mode,
        "cost_model": cost_model is not None,
    }
    correct = inst.check()
    result = RunResult(report, inst.checksum(), correct,
                       res.events if keep_events else [], per_worker)
    if not correct:
        raise OracleMismatch(result)
    return result


# -- sweeps -----------------------------------------------------------------

GRID_AXES = ("P", "placement", "scheduler", "local_bias", "push_threshold", "placement_policy", "seed")


@dataclass
class SweepEntry:
    point: dict
    result: Optional[RunResult] = None
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None


@dataclass(frozen=True)
class Machine:
    sockets: int = 4
    cores_per_socket: int = 8


def sweep(spec: BenchmarkSpec, grid: Mapping[str, Sequence], machine: Machine = Machine(),
          config: SchedulerConfig = SchedulerConfig(), mode: str = "sim",
          cost_model: Optional[CostModel] = CostModel(), placement: Placement = Placement(),
          defaults: Optional[Mapping] = None) -> List[SweepEntry]:
    """Run every point of the Cartesian product of ``grid``.

    Axes not in the grid take their value from ``defaults`` (then from the
    base config).  A failing point records its error and the sweep goes on.
    """
    if not grid:
        raise ValueError("sweep needs a non-empty grid")
    unknown = set(grid) - set(GRID_AXES)
    if unknown:
        raise ValueError(f"unknown grid axes {sorted(unknown)}; allowed: {GRID_AXES}")
    for axis, values in grid.items():
        if len(list(values)) == 0:
            raise ValueError(f"grid axis {axis!r} is empty")
    base = {"P": machine.sockets * machine.cores_per_socket, "placement": "packed",
            "scheduler": config.kind, "local_bias": config.local_bias,
            "push_threshold": config.push_threshold, "placement_policy": placement.policy,
            "seed": 0}
    base.update(defaults or {})
    axes = list(grid)
    entries = []
    for values in itertools.product(*(list(grid[a]) for a in axes)):
        point = dict(base)
        point.update(zip(axes, values))
        entry = SweepEntry(point)
        try:
            topo = make_topology(machine.sockets, machine.cores_per_socket, int(point["P"]),
                                 point["placement"])
            cfg = replace(config, kind=point["scheduler"], local_bias=float(point["local_bias"]),
                          push_threshold=int(point["push_threshold"]))
            plc = replace(placement, policy=point["placement_policy"])
            entry.result = run(spec, topo, cfg, mode=mode, seed=int(point["seed"]),
                               cost_model=cost_model, placement=plc)
        except Exception as exc:   # recorded per point; the sweep continues
            entry.error = f"{type(exc).__name__}: {exc}"
            if isinstance(exc, OracleMismatch):
                entry.result = exc.result
        entries.append(entry)
    return entries


AGG_METRICS = ("T_P", "W_P", "S_P", "I_P", "scalability", "work_inflation", "remote_accesses",
               "successful_steals", "push_events")


def _metric(report: RunReport, name: str):
    value = getattr(report, name)
    return float(value) if value is not None else None


def aggregate(entries: Iterable[SweepEntry], metrics: Sequence[str] = AGG_METRICS) -> List[dict]:
    """Mean and sample standard deviation over seeds for every other grid point."""
    groups: Dict[tuple, List[SweepEntry]] = {}
    for e in entries:
        key = tuple(sorted((k, v) for k, v in e.point.items() if k != "seed"))
        groups.setdefault(key, []).append(e)
    rows = []
    for key, group in groups.items():
        row = dict(key)
        good = [e.result.report for e in group if e.ok]
        row["runs"] = len(group)
        row["failures"] = len(group) - len(good)
        for m in metrics:
            vals = [v for v in (_metric(r, m) for r in good) if v is not None]
            row[f"{m}_mean"] = statistics.fmean(vals) if vals else None
            row[f"{m}_std"] = statistics.stdev(vals) if len(vals) > 1 else 0.0 if vals else None
        rows.append(row)
    return rows


def scalability_curves(entries: Iterable[SweepEntry]) -> Dict[tuple, List[Tuple[int, float, float]]]:
    """(scheduler, placement) -> [(P, mean T1/TP, std)] sorted by P."""
    curves: Dict[tuple, list] = {}
    for row in aggregate(entries, ("scalability",)):
        if row["scalability_mean"] is None:
            continue
        curves.setdefault((row["scheduler"], row["placement"]), []).append(
            (int(row["P"]), row["scalability_mean"], row["scalability_std"]))
    return {k: sorted(v) for k, v in curves.items()}


def sensitivity_table(entries: Iterable[SweepEntry], baseline: Tuple[float, int] = (0.7, 4)) -> List[dict]:
    """Mean T_P per (local_bias, push_threshold), normalized to the baseline pair.

    Normalization is within each (P, placement, policy) group; groups without
    a baseline point get ``normalized = None``.
    """
    rows = aggregate(entries, ("T_P",))
    base = {}
    for r in rows:
        if (r["local_bias"], r["push_threshold"]) == baseline and r["T_P_mean"]:
            base[(r["P"], r["placement"], r["placement_policy"], r["scheduler"])] = r["T_P_mean"]
    out = []
    for r in rows:
        ref = base.get((r["P"], r["placement"], r["placement_policy"], r["scheduler"]))
        out.append({
            "scheduler": r["scheduler"], "P": r["P"], "placement": r["placement"],
            "local_bias": r["local_bias"], "push_threshold": r["push_threshold"],
            "T_P_mean": r["T_P_mean"],
            "normalized": (r["T_P_mean"] / ref) if ref and r["T_P_mean"] is not None else None,
        })
    out.sort(key=lambda r: (r["scheduler"], r["P"], r["placement"], r["local_bias"], r["push_threshold"]))
    return out


def rows_to_csv(rows: Sequence[dict]) -> str:
    keys = []
    for r in rows:
        for k in r:
            if k not in keys:
                keys.append(k)
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=keys, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def rows_to_table(rows: Sequence[dict], columns: Optional[Sequence[str]] = None) -> str:
    if not rows:
        return "(no rows)"
    columns = list(columns or rows[0].keys())

    def fmt(v):
        if v is None:
            return "-"
        if isinstance(v, float):
            return f"{v:.3f}" if abs(v) < 1000 else f"{v:.1f}"
        return str(v)
    cells = [[fmt(r.get(c)) for c in columns] for r in rows]
    widths = [max(len(c), *(len(row[i]) for row in cells)) for i, c in enumerate(columns)]
    lines = ["  ".join(c.rjust(w) for c, w in zip(columns, widths)),
             "  ".join("-" * w for w in widths)]
    lines += ["  ".join(v.rjust(w) for v, w in zip(row, widths)) for row in cells]
    return "\n".join(lines)
