"""Shared plumbing for benchmark programs: specs, block spaces, instances."""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Callable, List, Tuple

import numpy as np

from ..dag import ComputationDag
from ..layout import BlockedLayout, LayoutKind
from ..topology import ANY

HINT_SCHEMES = ("none", "top-level-quarters", "custom")


@dataclass(frozen=True)
class BenchmarkSpec:
    name: str
    n: int
    base_case: int
    hints: str = "none"
    layout: str = "blocked"
    reps: int = 1
    params: Tuple[Tuple[str, object], ...] = ()

    def __post_init__(self):
        if self.base_case <= 0 or self.base_case > self.n:
            raise ValueError(f"base case {self.base_case} must lie in 1..n={self.n}")
        if self.reps < 1:
            raise ValueError("reps must be >= 1")
        if self.hints not in HINT_SCHEMES:
            raise ValueError(f"unknown hint scheme {self.hints!r}")
        LayoutKind(self.layout)

    def param(self, key, default=None):
        return dict(self.params).get(key, default)

    def with_params(self, **kwargs) -> "BenchmarkSpec":
        merged = dict(self.params)
        merged.update(kwargs)
        return BenchmarkSpec(self.name, self.n, self.base_case, self.hints, self.layout,
                             self.reps, tuple(sorted(merged.items())))


class Hints:
    """Maps top-level partition indices to places for the chosen scheme.

    Partitions whose place has no workers on the current topology fall back
    to ANY.
    """

    def __init__(self, spec: BenchmarkSpec, places: int):
        self.scheme = spec.hints
        self.places = places
        custom = spec.param("hint_places")
        if isinstance(custom, str):
            from ..topology import parse_place
            custom = [parse_place(p) for p in custom.split(",")]
        self.custom = list(custom) if custom is not None else [0, 1, 2, 3]

    @property
    def enabled(self) -> bool:
        return self.scheme != "none"

    def place(self, part: int) -> int:
        if self.scheme == "none":
            return ANY
        return self.partition_place(part)

    def partition_place(self, part: int) -> int:
        """Home place of partition ``part``, used for data placement even without hints."""
        p = self.custom[part % len(self.custom)] if self.scheme == "custom" else part
        return p if 0 <= p < self.places else ANY


class BlockSpace:
    """Allocates global data-block ids for arrays and matrices."""

    def __init__(self, block_elems: int):
        self.block_elems = int(block_elems)
        self.n_blocks = 0
        self.regions: List[Tuple[str, int, int]] = []

    def _take(self, name: str, count: int) -> int:
        base = self.n_blocks
        self.n_blocks += count
        self.regions.append((name, base, self.n_blocks))
        return base

    def vector(self, name: str, length: int) -> "VectorBlocks":
        count = -(-length // self.block_elems)
        return VectorBlocks(self._take(name, count), self.block_elems, length)

    def matrix(self, name: str, n: int, kind: str, b: int) -> "MatrixBlocks":
        b = min(b, n)
        layout = BlockedLayout(n, b, kind)
        offsets = layout.offsets()
        count = -(-(n * n) // self.block_elems)
        base = self._take(name, count)
        return MatrixBlocks(base + offsets // self.block_elems, layout)


@dataclass
class VectorBlocks:
    base: int
    block_elems: int
    length: int

    def footprint(self, lo: int, hi: int) -> range:
        lo = max(lo, 0)
        hi = min(hi, self.length)
        if hi <= lo:
            return range(0)
        return range(self.base + lo // self.block_elems, self.base + (hi - 1) // self.block_elems + 1)

    @property
    def blocks(self) -> range:
        return self.footprint(0, self.length)


@dataclass
class MatrixBlocks:
    blockmap: np.ndarray
    layout: BlockedLayout

    def footprint(self, r0, r1, c0, c1) -> tuple:
        return tuple(np.unique(self.blockmap[r0:r1, c0:c1]).tolist())

    def rect_blocks(self, r0, r1, c0, c1) -> np.ndarray:
        return self.blockmap[r0:r1, c0:c1]

    @property
    def blocks(self) -> range:
        return range(int(self.blockmap.min()), int(self.blockmap.max()) + 1)


def union_blocks(*groups) -> tuple:
    out = set()
    for g in groups:
        out.update(int(x) for x in g)
    return tuple(sorted(out))


@dataclass
class BenchInstance:
    """A built benchmark: its computation plus everything needed to check it."""

    name: str
    dag: ComputationDag
    n_blocks: int
    output: Callable[[], object]
    oracle: Callable[[], bool]
    partitions: List[Tuple[int, int, int]] = field(default_factory=list)  # (start, stop, part)

    def check(self) -> bool:
        return bool(self.oracle())

    def checksum(self) -> str:
        return checksum(self.output())


def checksum(value) -> str:
    h = hashlib.sha256()
    if isinstance(value, (list, tuple)):
        for v in value:
            h.update(np.ascontiguousarray(v).tobytes())
    else:
        h.update(np.ascontiguousarray(value).tobytes())
    return h.hexdigest()[:16]


def split4(lo: int, hi: int) -> List[Tuple[int, int]]:
    n = hi - lo
    cuts = [lo + (n * i) // 4 for i in range(5)]
    return [(cuts[i], cuts[i + 1]) for i in range(4)]


def label_runs(labels) -> List[Tuple[int, int, int]]:
    """Run-length encode per-block partition labels; negative labels are skipped."""
    labels = np.asarray(labels)
    runs = []
    if labels.size == 0:
        return runs
    edges = np.flatnonzero(np.diff(labels)) + 1
    starts = np.concatenate(([0], edges))
    stops = np.concatenate((edges, [labels.size]))
    for a, z in zip(starts, stops):
        if labels[a] >= 0:
            runs.append((int(a), int(z), int(labels[a])))
    return runs
