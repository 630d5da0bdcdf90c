"""Evaluation quantities computed from scheduler event traces."""
from __future__ import annotations

import csv
import io
import json
from collections import Counter
from dataclasses import asdict, dataclass, field
from typing import Iterable, Optional, Sequence

from .classic import EVENT_CATEGORY, SCHED_TIME, WORK_TIME


@dataclass
class TimeBreakdown:
    worker: int
    work: float = 0
    scheduling: float = 0
    idle: float = 0

    @property
    def total(self):
        return self.work + self.scheduling + self.idle


@dataclass
class RunReport:
    T_S: Optional[float] = None
    T_1: Optional[float] = None
    T_P: Optional[float] = None
    W_P: float = 0
    S_P: float = 0
    I_P: float = 0
    strand_work: float = 0
    successful_steals: int = 0
    deque_steals: int = 0
    mailbox_steals: int = 0
    steal_attempts: int = 0
    mailbox_first_flips: int = 0
    coin_flips: int = 0
    push_events: int = 0
    push_attempts: int = 0
    mailbox_deliveries: int = 0
    mailbox_pops: int = 0
    nontrivial_syncs: int = 0
    suspensions: int = 0
    remote_accesses: int = 0
    local_accesses: int = 0
    work: Optional[int] = None
    span: Optional[int] = None
    config: dict = field(default_factory=dict)

    @property
    def mailbox_ops(self) -> int:
        return self.mailbox_pops + self.mailbox_steals + self.push_attempts + self.mailbox_first_flips

    @property
    def spawn_overhead(self):
        return spawn_overhead(self.T_1, self.T_S) if self.T_S else None

    @property
    def work_inflation(self):
        return work_inflation(self.W_P, self.T_1) if self.T_1 else None

    @property
    def scalability(self):
        return scalability(self.T_1, self.T_P) if self.T_1 and self.T_P else None

    def to_dict(self) -> dict:
        out = asdict(self)
        out["mailbox_ops"] = self.mailbox_ops
        out["spawn_overhead"] = self.spawn_overhead
        out["work_inflation"] = self.work_inflation
        out["scalability"] = self.scalability
        return out


def _ratio(num, den, what):
    if not den:
        raise ZeroDivisionError(f"{what} requires a positive denominator")
    return num / den


def spawn_overhead(T1: float, TS: float) -> float:
    return _ratio(T1, TS, "spawn overhead")


def work_inflation(W_P: float, T1: float) -> float:
    return _ratio(W_P, T1, "work inflation")


def scalability(T1: float, TP: float) -> float:
    return _ratio(T1, TP, "scalability")


def breakdown(events: Iterable[tuple], workers: int) -> tuple:
    """Aggregate a trace into per-worker time breakdowns and a partial report.

    Events are ``(time, worker, kind, cost, detail)`` tuples.  ``T_S``,
    ``T_1`` and ``T_P`` are left for the caller, who knows the other runs.
    """
    per_worker = [TimeBreakdown(w) for w in range(workers)]
    counts = Counter()
    rep = RunReport()
    for _, wid, kind, cost, detail in events:
        try:
            cat = EVENT_CATEGORY[kind]
        except KeyError:
            raise ValueError(f"uncategorized trace event {kind!r}") from None
        tb = per_worker[wid]
        if cat == WORK_TIME:
            tb.work += cost
        elif cat == SCHED_TIME:
            tb.scheduling += cost
        else:
            tb.idle += cost
        counts[kind] += 1
        if kind == "strand":
            rep.strand_work += cost
            rep.remote_accesses += detail[1]
            rep.local_accesses += detail[2]
        elif kind == "coin" and detail:
            rep.mailbox_first_flips += 1
    rep.W_P = sum(t.work for t in per_worker)
    rep.S_P = sum(t.scheduling for t in per_worker)
    rep.I_P = sum(t.idle for t in per_worker)
    rep.deque_steals = counts["steal"]
    rep.mailbox_steals = counts["mailbox_steal"]
    rep.successful_steals = rep.deque_steals + rep.mailbox_steals
    rep.steal_attempts = counts["steal"] + counts["steal_fail"] + counts["mailbox_steal"]
    rep.coin_flips = counts["coin"]
    rep.push_events = counts["push_event"]
    rep.push_attempts = counts["push_attempt"]
    rep.mailbox_deliveries = counts["push_success"]
    rep.mailbox_pops = counts["mailbox_pop"]
    rep.nontrivial_syncs = counts["sync_ok"] + counts["suspend"]
    rep.suspensions = counts["suspend"]
    return per_worker, rep


# -- emission -----------------------------------------------------------------

TABLE_COLUMNS = [
    ("bench", "{}"), ("scheduler", "{}"), ("P", "{}"), ("placement", "{}"), ("seed", "{}"),
    ("T_S", "{:.2f}"), ("T_1", "{:.2f}"), ("T1/TS", "({:.2f}x)"),
    ("T_P", "{:.2f}"), ("T1/TP", "({:.1f}x)"),
    ("W_P", "{:.2f}"), ("W/T1", "({:.2f}x)"), ("S_P", "{:.2f}"), ("I_P", "{:.2f}"),
    ("steals", "{}"), ("pushes", "{}"), ("remote", "{}"),
]


def _row(rep: RunReport) -> dict:
    cfg = rep.config
    return {
        "bench": cfg.get("bench", "-"), "scheduler": cfg.get("scheduler", "-"),
        "P": cfg.get("P", "-"), "placement": cfg.get("placement", "-"), "seed": cfg.get("seed", "-"),
        "T_S": rep.T_S, "T_1": rep.T_1, "T1/TS": rep.spawn_overhead,
        "T_P": rep.T_P, "T1/TP": rep.scalability,
        "W_P": rep.W_P, "W/T1": rep.work_inflation, "S_P": rep.S_P, "I_P": rep.I_P,
        "steals": rep.successful_steals, "pushes": rep.push_events, "remote": rep.remote_accesses,
    }


def format_table(reports: Sequence[RunReport]) -> str:
    rows = []
    for rep in reports:
        r = _row(rep)
        rows.append([("-" if r[name] is None else fmt.format(r[name])) for name, fmt in TABLE_COLUMNS])
    header = [name for name, _ in TABLE_COLUMNS]
    widths = [max(len(h), *(len(row[i]) for row in rows)) if rows else len(h)
              for i, h in enumerate(header)]
    lines = ["  ".join(h.rjust(wd) for h, wd in zip(header, widths))]
    lines.append("  ".join("-" * wd for wd in widths))
    for row in rows:
        lines.append("  ".join(c.rjust(wd) for c, wd in zip(row, widths)))
    return "\n".join(lines)


def format_json(reports: Sequence[RunReport]) -> str:
    return json.dumps([r.to_dict() for r in reports], indent=2, sort_keys=True, default=str)


def format_csv(reports: Sequence[RunReport]) -> str:
    flat = []
    for rep in reports:
        d = rep.to_dict()
        cfg = d.pop("config")
        d.update({f"cfg_{k}": v for k, v in cfg.items()})
        flat.append(d)
    keys = sorted({k for d in flat for k in d})
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=keys, lineterminator="\n")
    writer.writeheader()
    for d in flat:
        writer.writerow(d)
    return buf.getvalue()


def write_trace(events: Iterable[tuple], fp) -> None:
    """Export a trace as CSV: time, worker, kind, category, cost, detail."""
    writer = csv.writer(fp, lineterminator="\n")
    writer.writerow(["time", "worker", "kind", "category", "cost", "detail"])
    for t, wid, kind, cost, detail in events:
        writer.writerow([t, wid, kind, EVENT_CATEGORY[kind], cost, json.dumps(detail)])
