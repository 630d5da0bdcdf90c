"""Two-pass parallel prefix sum.

An up-sweep records the sum of every subtree; a down-sweep then writes the
inclusive prefix of each leaf range offset by everything to its left.  Both
passes stream through the whole input with little reuse, which is what makes
this kernel locality-poor.
"""
from __future__ import annotations

import numpy as np

from ..dag import DagBuilder
from .base import BenchInstance, BenchmarkSpec, BlockSpace, Hints, label_runs, split4


def build(spec: BenchmarkSpec, places: int) -> BenchInstance:
    n, base = spec.n, spec.base_case
    hints = Hints(spec, places)
    values = np.random.default_rng(int(spec.param("data_seed", 5))).integers(-1000, 1000, n)
    out = np.zeros(n, dtype=np.int64)
    sums = {}

    space = BlockSpace(int(spec.param("block_elems", base)))
    vin = space.vector("input", n)
    vout = space.vector("output", n)

    def children(lo, hi):
        if hi - lo <= base:
            return []
        return [r for r in split4(lo, hi) if r[1] > r[0]]

    def up(bld: DagBuilder, lo, hi):
        parts = children(lo, hi)
        if not parts:
            def act():
                sums[lo, hi] = int(values[lo:hi].sum())
            bld.work(max(1, (hi - lo) // 4), vin.footprint(lo, hi), action=act, label=f"up [{lo},{hi})")
            return
        for p in parts[:-1]:
            bld.spawn(up, *p)
        up(bld, *parts[-1])
        bld.sync()

        def combine():
            sums[lo, hi] = sum(sums[p] for p in parts)
        bld.work(len(parts), (), action=combine, label=f"combine [{lo},{hi})")

    def down(bld: DagBuilder, lo, hi, offset_of):
        parts = children(lo, hi)
        if not parts:
            def act():
                out[lo:hi] = np.cumsum(values[lo:hi]) + offset_of()
            blocks = sorted(set(vin.footprint(lo, hi)) | set(vout.footprint(lo, hi)))
            bld.work(max(1, (hi - lo) // 2), blocks, action=act, label=f"down [{lo},{hi})")
            return
        for i, p in enumerate(parts):
            left = parts[:i]
            bld.spawn(down, *p, _offset(offset_of, left, sums))
        bld.sync()

    def top(bld: DagBuilder, phase):
        parts = children(0, n)
        if not parts:
            (up if phase == "up" else down)(bld, 0, n, *(() if phase == "up" else (lambda: 0,)))
            return
        for q, p in enumerate(parts):
            if hints.enabled:
                bld.set_locality(hints.place(q + 1) if q < len(parts) - 1 else hints.place(0))
            args = p if phase == "up" else (*p, _offset(lambda: 0, parts[:q], sums))
            bld.spawn(up if phase == "up" else down, *args,
                      place=hints.place(q) if hints.enabled else None)
        bld.sync()
        if phase == "up":
            def combine():
                sums[0, n] = sum(sums[p] for p in parts)
            bld.work(len(parts), (), action=combine, label="combine root")

    def main(bld: DagBuilder):
        top(bld, "up")
        top(bld, "down")

    dag = DagBuilder().build(main, place=hints.place(0))

    labels = np.full(space.n_blocks, -1)
    for q, (s0, s1) in enumerate(split4(0, n)):
        for vb in (vin, vout):
            labels[list(vb.footprint(s0, s1))] = q
    partitions = label_runs(labels) if n > base else []

    def output():
        return out.copy()

    def oracle():
        return np.array_equal(out, np.cumsum(values))

    return BenchInstance("scan", dag, space.n_blocks, output, oracle, partitions)


def _offset(parent_offset, left_ranges, sums):
    """Deferred offset: the parent's offset plus the sums of left siblings."""
    left = tuple(left_ranges)
    return lambda: parent_offset() + sum(sums[r] for r in left)
