"""Recursive LU factorization without pivoting, in place.

The input is made strictly diagonally dominant so that no pivoting is needed.
At the top level, each sub-task is hinted to the place owning the matrix
quadrant it writes (owner computes).
"""
from __future__ import annotations

import numpy as np
from scipy.linalg import solve_triangular

from ..dag import DagBuilder
from .base import BenchInstance, BenchmarkSpec, BlockSpace, Hints, label_runs


def make_input(n: int, seed: int) -> np.ndarray:
    a = np.random.default_rng(seed).uniform(-1.0, 1.0, (n, n))
    a[np.diag_indices(n)] = np.abs(a).sum(axis=1) + 1.0
    return a


def lu_inplace(a: np.ndarray):
    """Unblocked Doolittle factorization of a square view."""
    for k in range(a.shape[0] - 1):
        a[k + 1:, k] /= a[k, k]
        a[k + 1:, k + 1:] -= np.outer(a[k + 1:, k], a[k, k + 1:])


def build(spec: BenchmarkSpec, places: int) -> BenchInstance:
    n, b = spec.n, spec.base_case
    hints = Hints(spec, places)
    A = make_input(n, int(spec.param("data_seed", 13)))
    original = A.copy()
    space = BlockSpace(b * b)
    bm = space.matrix("A", n, spec.layout, b)

    def view(r, c, m):
        return A[r:r + m, c:c + m]

    def fp(*rects):
        out = set()
        for r, c, m in rects:
            out.update(bm.footprint(r, r + m, c, c + m))
        return sorted(out)

    def place_for(r, c, top):
        if not (top and hints.enabled):
            return None
        return hints.place(2 * (r >= n // 2) + 1 * (c >= n // 2))

    def gemm(bld: DagBuilder, c, a, bb, m, top=False):
        """C -= A @ B on m x m views given by (row, col) corners."""
        if m <= b:
            def act():
                view(*c, m)[...] -= view(*a, m) @ view(*bb, m)
            bld.work(max(1, m ** 3 // 8), fp((*c, m), (*a, m), (*bb, m)), action=act, label="gemm")
            return
        h = m // 2
        for i in range(2):
            for j in range(2):
                ci = (c[0] + i * h, c[1] + j * h)
                bld.spawn(gemm_pair, ci, (a[0] + i * h, a[1]), (bb[0], bb[1] + j * h), h,
                          place=place_for(*ci, top))
        bld.sync()

    def gemm_pair(bld, c, arow, bcol, h):
        gemm(bld, c, arow, bcol, h)
        gemm(bld, c, (arow[0], arow[1] + h), (bcol[0] + h, bcol[1]), h)

    def trsm_lower(bld: DagBuilder, l, x, m, top=False):
        """X <- L^-1 X with unit lower-triangular L."""
        if m <= b:
            def act():
                view(*x, m)[...] = solve_triangular(view(*l, m), view(*x, m), lower=True,
                                                    unit_diagonal=True, check_finite=False)
            bld.work(max(1, m ** 3 // 16), fp((*l, m), (*x, m)), action=act, label="trsm L")
            return
        h = m // 2
        for j in range(2):
            bld.spawn(trsm_lower_col, l, (x[0], x[1] + j * h), h, place=place_for(x[0], x[1] + j * h, top))
        bld.sync()

    def trsm_lower_col(bld, l, x, h):
        trsm_lower(bld, l, x, h)
        gemm(bld, (x[0] + h, x[1]), (l[0] + h, l[1]), x, h)
        trsm_lower(bld, (l[0] + h, l[1] + h), (x[0] + h, x[1]), h)

    def trsm_upper(bld: DagBuilder, u, x, m, top=False):
        """X <- X U^-1 with upper-triangular U."""
        if m <= b:
            def act():
                view(*x, m)[...] = solve_triangular(view(*u, m), view(*x, m).T, trans="T",
                                                    lower=False, check_finite=False).T
            bld.work(max(1, m ** 3 // 16), fp((*u, m), (*x, m)), action=act, label="trsm U")
            return
        h = m // 2
        for i in range(2):
            bld.spawn(trsm_upper_row, u, (x[0] + i * h, x[1]), h, place=place_for(x[0] + i * h, x[1], top))
        bld.sync()

    def trsm_upper_row(bld, u, x, h):
        trsm_upper(bld, u, x, h)
        gemm(bld, (x[0], x[1] + h), x, (u[0], u[1] + h), h)
        trsm_upper(bld, (u[0] + h, u[1] + h), (x[0], x[1] + h), h)

    def lu(bld: DagBuilder, r, m, top=False):
        if m <= b:
            bld.work(max(1, m ** 3 // 12), fp((r, r, m)), action=lambda: lu_inplace(view(r, r, m)),
                     label=f"lu {r}")
            return
        h = m // 2
        lu(bld, r, h)
        bld.spawn(trsm_lower, (r, r), (r, r + h), h, top, place=place_for(r, r + h, top))
        bld.spawn(trsm_upper, (r, r), (r + h, r), h, top, place=place_for(r + h, r, top))
        bld.sync()
        gemm(bld, (r + h, r + h), (r + h, r), (r, r + h), h, top)
        if top and hints.enabled:
            bld.set_locality(hints.place(3))
        lu(bld, r + h, h)

    dag = DagBuilder().build(lu, 0, n, True, place=hints.place(0))

    labels = np.full(space.n_blocks, -1)
    if n > b:
        rows, cols = np.indices((n, n))
        labels[bm.blockmap.ravel()] = (2 * (rows >= n // 2) + 1 * (cols >= n // 2)).ravel()
    partitions = label_runs(labels)

    def output():
        return A.copy()

    def oracle():
        L = np.tril(A, -1) + np.eye(n)
        U = np.triu(A)
        return np.allclose(L @ U, original, rtol=1e-10, atol=1e-10 * n)

    return BenchInstance("lu", dag, space.n_blocks, output, oracle, partitions)
