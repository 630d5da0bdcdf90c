"""Fork-join computations as frame trees.

A computation is a tree of frames (one per spawned function instance).  Each
frame has a body: a sequence of ops executed in order by whichever worker
currently owns the frame.  The continuation of a frame is simply its program
counter into that body, which is what makes continuation stealing trivial to
express.

Programs are written against :class:`DagBuilder`, which mirrors the
spawn / sync / set-locality vocabulary::

    def fib(b, n):
        if n < 2:
            b.work(1)
            return
        b.spawn(fib, n - 1)
        b.spawn(fib, n - 2)
        b.sync()
        b.work(1)

    dag = build_dag(fib, 10)
"""
from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

from .topology import ANY, format_place, parse_place

WORK, SPAWN, SYNC, LOCALITY, RETURN = range(5)
OP_NAMES = {WORK: "work", SPAWN: "spawn", SYNC: "sync", LOCALITY: "locality", RETURN: "return"}
NO_PARENT = -1


class DagError(ValueError):
    """Raised for malformed computations."""


@dataclass(frozen=True)
class Strand:
    sid: int
    frame: int
    duration: int
    blocks: Tuple[int, ...] = ()
    action: Optional[Callable[[], None]] = field(default=None, compare=False, repr=False)
    label: str = ""


@dataclass(frozen=True)
class FrameNode:
    fid: int
    parent: int
    place: int
    body: Tuple[tuple, ...]

    def children(self):
        return [op[1] for op in self.body if op[0] == SPAWN]


@dataclass(frozen=True)
class WorkSpanReport:
    work: int
    span: int

    @property
    def parallelism(self) -> float:
        return self.work / self.span if self.span else float("inf")


@dataclass
class SerialResult:
    trace: List[int]
    cost: int


class ComputationDag:
    def __init__(self, frames: Sequence[FrameNode], strands: Sequence[Strand], root: int = 0):
        self.frames = list(frames)
        self.strands = list(strands)
        self.root = root
        self.validate()

    @property
    def n_spawns(self) -> int:
        return len(self.frames) - 1

    @property
    def total_duration(self) -> int:
        return sum(s.duration for s in self.strands)

    def validate(self):
        if not self.frames:
            raise DagError("empty computation")
        seen_children = set()
        for idx, node in enumerate(self.frames):
            if node.fid != idx:
                raise DagError(f"frame id {node.fid} at position {idx}")
            if not node.body or node.body[-1][0] != RETURN:
                raise DagError(f"frame {idx} does not end with return")
            pending = False
            for op in node.body[:-1]:
                kind = op[0]
                if kind == RETURN:
                    raise DagError(f"frame {idx} returns before its last op")
                if kind == SPAWN:
                    child = op[1]
                    if not 0 < child < len(self.frames) or child <= idx:
                        raise DagError(f"frame {idx} spawns invalid frame {child}")
                    if child in seen_children:
                        raise DagError(f"frame {child} spawned twice")
                    if self.frames[child].parent != idx:
                        raise DagError(f"frame {child} parent mismatch")
                    seen_children.add(child)
                    pending = True
                elif kind == SYNC:
                    pending = False
                elif kind == WORK:
                    sid = op[1]
                    if not 0 <= sid < len(self.strands) or self.strands[sid].frame != idx:
                        raise DagError(f"frame {idx} references foreign strand {sid}")
                elif kind != LOCALITY:
                    raise DagError(f"unknown op {op!r}")
            if pending:
                raise DagError(f"frame {idx} returns with unsynced children")
        if self.frames[self.root].parent != NO_PARENT:
            raise DagError("root frame has a parent")
        if len(seen_children) != len(self.frames) - 1:
            raise DagError("unreachable frames")
        for s in self.strands:
            if int(s.duration) != s.duration or s.duration <= 0:
                raise DagError(f"strand {s.sid} has non-positive duration {s.duration}")


class DagBuilder:
    """Records a fork-join program into a :class:`ComputationDag`."""

    def __init__(self):
        self._frames: list = []   # [parent, place, ops]
        self._strands: list = []
        self._stack: list = []    # [fid, current place, pending spawns]

    def _new_frame(self, parent: int, place: int) -> int:
        self._frames.append([parent, place, []])
        return len(self._frames) - 1

    @property
    def current_place(self) -> int:
        return self._stack[-1][1]

    def work(self, duration: int, blocks: Sequence[int] = (), action=None, label: str = "") -> int:
        fid = self._stack[-1][0]
        sid = len(self._strands)
        self._strands.append(Strand(sid, fid, int(duration), tuple(int(b) for b in blocks),
                                    action, label))
        self._frames[fid][2].append((WORK, sid))
        return sid

    def set_locality(self, place: int):
        """Update the hint of the running frame; later spawns inherit it."""
        self._stack[-1][1] = place
        self._frames[self._stack[-1][0]][2].append((LOCALITY, place))

    def spawn(self, fn: Callable, *args, place: Optional[int] = None, **kwargs) -> int:
        """Spawn ``fn(builder, *args)``.

        The child's place is ``place`` when the spawn is explicitly marked,
        otherwise the spawner's current hint.
        """
        parent = self._stack[-1]
        child_place = parent[1] if place is None else place
        child = self._new_frame(parent[0], child_place)
        self._frames[parent[0]][2].append((SPAWN, child))
        parent[2] = True
        self._enter(child, fn, args, kwargs)
        return child

    def sync(self):
        frame = self._stack[-1]
        self._frames[frame[0]][2].append((SYNC,))
        frame[2] = False

    def _enter(self, fid, fn, args, kwargs):
        self._stack.append([fid, self._frames[fid][1], False])
        fn(self, *args, **kwargs)
        frame = self._stack.pop()
        if frame[2]:
            self._frames[fid][2].append((SYNC,))
        self._frames[fid][2].append((RETURN,))

    def build(self, fn: Callable, *args, place: int = ANY, **kwargs) -> ComputationDag:
        if self._frames:
            raise DagError("builder already used")
        root = self._new_frame(NO_PARENT, place)
        self._enter(root, fn, args, kwargs)
        frames = [FrameNode(i, p, pl, tuple(ops)) for i, (p, pl, ops) in enumerate(self._frames)]
        return ComputationDag(frames, self._strands, root)


def build_dag(fn: Callable, *args, place: int = ANY, **kwargs) -> ComputationDag:
    return DagBuilder().build(fn, *args, place=place, **kwargs)


def serial_elide(dag: ComputationDag, cost_fn: Optional[Callable[[Strand], int]] = None,
                 run_actions: bool = True) -> SerialResult:
    """Execute the computation depth-first, child before continuation."""
    trace = []
    cost = 0
    stack = [(dag.root, 0)]
    frames = dag.frames
    while stack:
        fid, pc = stack.pop()
        body = frames[fid].body
        while True:
            op = body[pc]
            kind = op[0]
            pc += 1
            if kind == WORK:
                strand = dag.strands[op[1]]
                if run_actions and strand.action is not None:
                    strand.action()
                trace.append(strand.sid)
                cost += strand.duration if cost_fn is None else cost_fn(strand)
            elif kind == SPAWN:
                stack.append((fid, pc))
                stack.append((op[1], 0))
                break
            elif kind == RETURN:
                break
    return SerialResult(trace, cost)


def work_span(dag: ComputationDag, spawn_cost: int = 0) -> WorkSpanReport:
    """Total work and critical-path length.  ``spawn_cost`` is charged per spawn
    on the spawner's path, as the scheduler does."""
    frames = dag.frames
    durations = [s.duration for s in dag.strands]
    span = [0] * len(frames)
    # children always have larger ids than their parent
    for fid in range(len(frames) - 1, -1, -1):
        cur = 0
        joined = 0
        for op in frames[fid].body:
            kind = op[0]
            if kind == WORK:
                cur += durations[op[1]]
            elif kind == SPAWN:
                cur += spawn_cost
                joined = max(joined, cur + span[op[1]])
            elif kind == SYNC:
                cur = max(cur, joined)
        span[fid] = max(cur, joined)
    work = sum(durations) + spawn_cost * dag.n_spawns
    return WorkSpanReport(work, span[dag.root])


# -- text format ------------------------------------------------------------

FORMAT_HEADER = "# worksteal-dag 1"


def dump_dag(dag: ComputationDag, fp) -> None:
    """Write the line format: ``frame``, ``strand`` and ``op`` records, ordered by id."""
    fp.write(FORMAT_HEADER + "\n")
    for node in dag.frames:
        parent = "-" if node.parent == NO_PARENT else str(node.parent)
        fp.write(f"frame {node.fid} {parent} {format_place(node.place)}\n")
    for s in dag.strands:
        blocks = ",".join(map(str, s.blocks)) or "-"
        fp.write(f"strand {s.sid} {s.frame} {s.duration} {blocks}\n")
    for node in dag.frames:
        for op in node.body:
            kind = op[0]
            if kind in (WORK, SPAWN):
                fp.write(f"op {node.fid} {OP_NAMES[kind]} {op[1]}\n")
            elif kind == LOCALITY:
                fp.write(f"op {node.fid} locality {format_place(op[1])}\n")
            else:
                fp.write(f"op {node.fid} {OP_NAMES[kind]}\n")


def dumps_dag(dag: ComputationDag) -> str:
    buf = io.StringIO()
    dump_dag(dag, buf)
    return buf.getvalue()


def load_dag(fp) -> ComputationDag:
    frames = {}
    strands = {}
    bodies = {}
    names = {v: k for k, v in OP_NAMES.items()}
    for lineno, raw in enumerate(fp, 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        try:
            tag = parts[0]
            if tag == "frame":
                fid = int(parts[1])
                parent = NO_PARENT if parts[2] == "-" else int(parts[2])
                frames[fid] = (parent, parse_place(parts[3]))
            elif tag == "strand":
                sid, fid, dur = int(parts[1]), int(parts[2]), int(parts[3])
                blocks = () if parts[4] == "-" else tuple(int(x) for x in parts[4].split(","))
                strands[sid] = Strand(sid, fid, dur, blocks)
            elif tag == "op":
                fid, kind = int(parts[1]), names[parts[2]]
                if kind in (WORK, SPAWN):
                    op = (kind, int(parts[3]))
                elif kind == LOCALITY:
                    op = (kind, parse_place(parts[3]))
                else:
                    op = (kind,)
                bodies.setdefault(fid, []).append(op)
            else:
                raise DagError(f"unknown record {tag!r}")
        except (IndexError, KeyError, ValueError) as exc:
            raise DagError(f"line {lineno}: cannot parse {line!r}") from exc
    if sorted(frames) != list(range(len(frames))) or sorted(strands) != list(range(len(strands))):
        raise DagError("frame or strand ids are not dense")
    nodes = [FrameNode(f, frames[f][0], frames[f][1], tuple(bodies.get(f, ()))) for f in range(len(frames))]
    return ComputationDag(nodes, [strands[s] for s in range(len(strands))])


def loads_dag(text: str) -> ComputationDag:
    return load_dag(io.StringIO(text))
