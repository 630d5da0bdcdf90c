"""Jacobi heat diffusion on a square grid, tiled and recursively decomposed.

Two grids alternate as source and destination.  Each time step recurses over
the tile grid in Z order; the four top-level quadrants are the partitions
that locality hints and data placement refer to.
"""
from __future__ import annotations

import numpy as np

from ..dag import DagBuilder
from .base import BenchInstance, BenchmarkSpec, BlockSpace, Hints, label_runs, union_blocks

ALPHA = 0.125


def initial_grid(n: int, seed: int = 7) -> np.ndarray:
    """Interior values in [0, 1) surrounded by a fixed zero ghost ring."""
    g = np.zeros((n + 2, n + 2))
    g[1:-1, 1:-1] = np.random.default_rng(seed).random((n, n))
    return g


def jacobi_tile(src: np.ndarray, dst: np.ndarray, r0: int, r1: int, c0: int, c1: int):
    """Update interior cells [r0, r1) x [c0, c1) of ``dst`` from ``src``."""
    a, b, c, d = r0 + 1, r1 + 1, c0 + 1, c1 + 1
    centre = src[a:b, c:d]
    lap = src[a - 1:b - 1, c:d] + src[a + 1:b + 1, c:d] + src[a:b, c - 1:d - 1] + src[a:b, c + 1:d + 1]
    dst[a:b, c:d] = centre + ALPHA * (lap - 4.0 * centre)


def reference(n: int, steps: int, seed: int = 7) -> np.ndarray:
    grids = [initial_grid(n, seed), initial_grid(n, seed)]
    for t in range(steps):
        jacobi_tile(grids[t % 2], grids[(t + 1) % 2], 0, n, 0, n)
    return grids[steps % 2][1:-1, 1:-1]


def quadrant_of(row: int, col: int, n: int) -> int:
    """Top-level partition index: 0 1 / 2 3 by quadrant."""
    return 2 * (row >= n // 2) + 1 * (col >= n // 2)


def build(spec: BenchmarkSpec, places: int) -> BenchInstance:
    n, b = spec.n, spec.base_case
    steps = int(spec.param("steps", 4))
    cell_cost = int(spec.param("cell_cost", 1))
    seed = int(spec.param("data_seed", 7))
    hints = Hints(spec, places)

    space = BlockSpace(b * b)
    bmaps = [space.matrix("grid0", n, spec.layout, b), space.matrix("grid1", n, spec.layout, b)]
    grids = [initial_grid(n, seed), initial_grid(n, seed)]

    def footprint(t, r0, r1, c0, c1):
        src, dst = bmaps[t % 2], bmaps[(t + 1) % 2]
        halo = [src.rect_blocks(r0, r1, c0, c1).ravel()]
        if r0 > 0:
            halo.append(src.rect_blocks(r0 - 1, r0, c0, c1).ravel())
        if r1 < n:
            halo.append(src.rect_blocks(r1, r1 + 1, c0, c1).ravel())
        if c0 > 0:
            halo.append(src.rect_blocks(r0, r1, c0 - 1, c0).ravel())
        if c1 < n:
            halo.append(src.rect_blocks(r0, r1, c1, c1 + 1).ravel())
        halo.append(dst.rect_blocks(r0, r1, c0, c1).ravel())
        return union_blocks(*halo)

    def region(bld: DagBuilder, t, r0, c0, size):
        if size <= b:
            src, dst = grids[t % 2], grids[(t + 1) % 2]
            bld.work(size * size * cell_cost, footprint(t, r0, r0 + size, c0, c0 + size),
                     action=lambda: jacobi_tile(src, dst, r0, r0 + size, c0, c0 + size),
                     label=f"heat t{t} ({r0},{c0})")
            return
        h = size // 2
        quads = [(r0, c0), (r0, c0 + h), (r0 + h, c0), (r0 + h, c0 + h)]
        for qr, qc in quads[:-1]:
            bld.spawn(region, t, qr, qc, h)
        region(bld, t, *quads[-1], h)
        bld.sync()

    def sweep(bld: DagBuilder, t):
        h = n // 2
        quads = [(0, 0), (0, h), (h, 0), (h, h)]
        if n <= b:
            region(bld, t, 0, 0, n)
            return
        if not hints.enabled:
            for qr, qc in quads:
                bld.spawn(region, t, qr, qc, h)
            bld.sync()
            return
        # each quadrant's spawn is marked with its own place, while the
        # continuation already carries the next quadrant's place
        for q, (qr, qc) in enumerate(quads):
            nxt = hints.place(q + 1) if q < 3 else hints.place(0)
            bld.set_locality(nxt)
            bld.spawn(region, t, qr, qc, h, place=hints.place(q))
        bld.sync()

    def main(bld: DagBuilder):
        if hints.enabled:
            bld.set_locality(hints.place(0))
        for t in range(steps):
            bld.spawn(sweep, t)
            bld.sync()

    dag = DagBuilder().build(main)

    labels = np.full(space.n_blocks, -1)
    if n > b:
        rows, cols = np.indices((n, n))
        quad = quadrant_of(rows, cols, n)
        for bm in bmaps:
            labels[bm.blockmap.ravel()] = quad.ravel()
    partitions = label_runs(labels)

    def output():
        return grids[steps % 2][1:-1, 1:-1].copy()

    def oracle():
        return np.array_equal(output(), reference(n, steps, seed))

    return BenchInstance("heat", dag, space.n_blocks, output, oracle, partitions)

