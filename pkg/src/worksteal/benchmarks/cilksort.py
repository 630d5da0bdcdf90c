"""Four-way parallel mergesort with a parallel, binary-search-split merge."""
from __future__ import annotations

import math

import numpy as np

from ..dag import DagBuilder
from .base import BenchInstance, BenchmarkSpec, BlockSpace, Hints, label_runs, split4


def sort_cost(m: int) -> int:
    return max(1, (m * max(1, int(math.log2(max(m, 2))))) // 4)


def build(spec: BenchmarkSpec, places: int) -> BenchInstance:
    n, base = spec.n, spec.base_case
    merge_base = int(spec.param("merge_base", base))
    hints = Hints(spec, places)
    data = np.random.default_rng(int(spec.param("data_seed", 11))).integers(0, 1 << 40, n)
    original = data.copy()
    arrays = [data, np.empty_like(data)]          # 0: values, 1: scratch

    space = BlockSpace(int(spec.param("block_elems", base)))
    vblocks = [space.vector("values", n), space.vector("scratch", n)]

    def fp(which, lo, hi):
        return vblocks[which].footprint(lo, hi)

    def leaf_sort(bld: DagBuilder, lo, hi):
        def act():
            arrays[0][lo:hi] = np.sort(arrays[0][lo:hi], kind="stable")
        bld.work(sort_cost(hi - lo), fp(0, lo, hi), action=act, label=f"sort [{lo},{hi})")

    def sort(bld: DagBuilder, lo, hi, top=False):
        if hi - lo <= base:
            leaf_sort(bld, lo, hi)
            return
        quarters = split4(lo, hi)
        if top and hints.enabled:
            for q, (s0, s1) in enumerate(quarters):
                bld.set_locality(hints.place(q + 1) if q < 3 else hints.place(0))
                bld.spawn(sort, s0, s1, place=hints.place(q))
        else:
            for s0, s1 in quarters[:-1]:
                bld.spawn(sort, s0, s1)
            sort(bld, *quarters[-1])
        bld.sync()
        (q0, q1), (q2, q3) = (quarters[0], quarters[1]), (quarters[2], quarters[3])
        bld.spawn(merge_runs, 0, q0, q1, 1, q0[0])
        merge_runs(bld, 0, q2, q3, 1, q2[0])
        bld.sync()
        merge_runs(bld, 1, (q0[0], q1[1]), (q2[0], q3[1]), 0, lo)

    def merge_runs(bld, src, ra, rb, dst, d0):
        """Merge sorted runs src[ra] and src[rb] into dst starting at d0."""
        a0, a1 = ra
        b0, b1 = rb
        na, nb = a1 - a0, b1 - b0
        total = na + nb
        if total <= merge_base:
            def act():
                merged = np.concatenate((arrays[src][a0:a1], arrays[src][b0:b1]))
                arrays[dst][d0:d0 + total] = np.sort(merged, kind="stable")
            blocks = sorted(set(fp(src, a0, a1)) | set(fp(src, b0, b1)) | set(fp(dst, d0, d0 + total)))
            bld.work(max(1, total), blocks, action=act, label=f"merge {total}")
            return
        # split the output range in half; each half is produced by a strand
        # that locates its inputs with binary search on the sorted runs
        half = total // 2
        bld.spawn(_output_slice, src, a0, a1, b0, b1, dst, d0, 0, half)
        _output_slice(bld, src, a0, a1, b0, b1, dst, d0, half, total)
        bld.sync()

    def _output_slice(bld, src, a0, a1, b0, b1, dst, d0, k0, k1):
        if k1 - k0 <= merge_base:
            def act():
                A, B = arrays[src][a0:a1], arrays[src][b0:b1]
                i0, j0 = _co_rank(k0, A, B)
                i1, j1 = _co_rank(k1, A, B)
                merged = np.concatenate((A[i0:i1], B[j0:j1]))
                arrays[dst][d0 + k0:d0 + k1] = np.sort(merged, kind="stable")
            # the inputs touched are data dependent; charge the proportional share
            na, nb = a1 - a0, b1 - b0
            total = na + nb
            ia0, ia1 = a0 + (na * k0) // total, a0 + -(-(na * k1) // total)
            ib0, ib1 = b0 + (nb * k0) // total, b0 + -(-(nb * k1) // total)
            blocks = sorted(set(fp(src, ia0, ia1)) | set(fp(src, ib0, ib1))
                            | set(fp(dst, d0 + k0, d0 + k1)))
            bld.work(max(1, k1 - k0), blocks, action=act, label=f"merge out [{k0},{k1})")
            return
        mid = (k0 + k1) // 2
        bld.spawn(_output_slice, src, a0, a1, b0, b1, dst, d0, k0, mid)
        _output_slice(bld, src, a0, a1, b0, b1, dst, d0, mid, k1)
        bld.sync()

    dag = DagBuilder().build(sort, 0, n, True, place=hints.place(0))

    labels = np.full(space.n_blocks, -1)
    for q, (s0, s1) in enumerate(split4(0, n)):
        for vb in vblocks:
            labels[list(vb.footprint(s0, s1))] = q
    partitions = label_runs(labels) if n > base else []

    def output():
        return arrays[0].copy()

    def oracle():
        out = arrays[0]
        return bool(np.all(out[:-1] <= out[1:])) and np.array_equal(out, np.sort(original))

    return BenchInstance("cilksort", dag, space.n_blocks, output, oracle, partitions)


def _co_rank(k: int, A: np.ndarray, B: np.ndarray):
    """Split k merged outputs into (i, j) taken from A and B, stable A-first."""
    lo, hi = max(0, k - len(B)), min(k, len(A))
    while lo < hi:
        i = (lo + hi) // 2
        j = k - i
        if j > 0 and i < len(A) and B[j - 1] >= A[i]:
            lo = i + 1
        else:
            hi = i
    return lo, k - lo
