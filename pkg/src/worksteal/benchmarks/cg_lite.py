"""Conjugate gradient on a 2-D Poisson matrix for a fixed number of iterations.

Rows are processed in chunks of ``base_case``; dot products are reduced per
chunk and summed in chunk order, so the result does not depend on the
schedule.  The chunk range splits into four top-level partitions.
"""
from __future__ import annotations

import math

import numpy as np
import scipy.sparse as sp

from ..dag import DagBuilder
from .base import BenchInstance, BenchmarkSpec, BlockSpace, Hints, label_runs, split4


def poisson2d(n: int) -> sp.csr_matrix:
    g = math.isqrt(n)
    if g * g != n:
        raise ValueError("cg_lite needs n to be a perfect square")
    t = sp.diags([-1.0, 2.0, -1.0], [-1, 0, 1], shape=(g, g))
    eye = sp.identity(g)
    return (sp.kron(eye, t) + sp.kron(t, eye)).tocsr()


def chunk_bounds(n: int, base: int):
    return [(lo, min(n, lo + base)) for lo in range(0, n, base)]


def reference(A: sp.csr_matrix, rhs: np.ndarray, iters: int, base: int) -> np.ndarray:
    """Sequential CG with the same chunked reductions as the parallel version."""
    chunks = chunk_bounds(len(rhs), base)
    x = np.zeros_like(rhs)
    r = rhs.copy()
    p = r.copy()
    rr = _chunked_dot(r, r, chunks)
    for _ in range(iters):
        ap = A @ p
        alpha = rr / _chunked_dot(p, ap, chunks)
        x += alpha * p
        r -= alpha * ap
        rr_new = _chunked_dot(r, r, chunks)
        p = r + (rr_new / rr) * p
        rr = rr_new
    return x


def _chunked_dot(a, b, chunks):
    return float(np.sum(np.array([a[lo:hi] @ b[lo:hi] for lo, hi in chunks])))


def build(spec: BenchmarkSpec, places: int) -> BenchInstance:
    n, base = spec.n, spec.base_case
    iters = int(spec.param("iterations", 8))
    hints = Hints(spec, places)
    A = poisson2d(n)
    rhs = np.random.default_rng(int(spec.param("data_seed", 17))).random(n)
    chunks = chunk_bounds(n, base)
    nc = len(chunks)

    x = np.zeros(n)
    r = rhs.copy()
    p = rhs.copy()
    ap = np.zeros(n)
    partial = np.zeros(nc)
    state = {"rr": _chunked_dot(r, r, chunks)}

    space = BlockSpace(base)
    vx, vr, vp, vap = (space.vector(name, n) for name in ("x", "r", "p", "Ap"))
    vmat = space.vector("A", A.nnz)

    def spmv_leaf(c):
        lo, hi = chunks[c]
        cols = A.indices[A.indptr[lo]:A.indptr[hi]]

        def act():
            ap[lo:hi] = A[lo:hi] @ p
            partial[c] = p[lo:hi] @ ap[lo:hi]
        blocks = set(vmat.footprint(A.indptr[lo], A.indptr[hi]))
        blocks |= set(vp.footprint(int(cols.min()), int(cols.max()) + 1))
        blocks |= set(vap.footprint(lo, hi))
        return max(1, int(A.indptr[hi] - A.indptr[lo]) // 2), sorted(blocks), act

    def update_leaf(c):
        lo, hi = chunks[c]

        def act():
            alpha = state["alpha"]
            x[lo:hi] += alpha * p[lo:hi]
            r[lo:hi] -= alpha * ap[lo:hi]
            partial[c] = r[lo:hi] @ r[lo:hi]
        blocks = set(vx.footprint(lo, hi)) | set(vr.footprint(lo, hi))
        blocks |= set(vp.footprint(lo, hi)) | set(vap.footprint(lo, hi))
        return max(1, (hi - lo) // 2), sorted(blocks), act

    def direction_leaf(c):
        lo, hi = chunks[c]

        def act():
            p[lo:hi] = r[lo:hi] + state["beta"] * p[lo:hi]
        return max(1, (hi - lo) // 4), sorted(set(vr.footprint(lo, hi)) | set(vp.footprint(lo, hi))), act

    leaves = {"spmv": spmv_leaf, "update": update_leaf, "direction": direction_leaf}

    def pfor(bld: DagBuilder, phase, c0, c1):
        if c1 - c0 == 1:
            dur, blocks, act = leaves[phase](c0)
            bld.work(dur, blocks, action=act, label=f"{phase} {c0}")
            return
        mid = (c0 + c1) // 2
        bld.spawn(pfor, phase, c0, mid)
        pfor(bld, phase, mid, c1)
        bld.sync()

    def phase_top(bld: DagBuilder, phase):
        parts = [q for q in split4(0, nc) if q[1] > q[0]]
        if len(parts) < 4 or not hints.enabled:
            pfor(bld, phase, 0, nc)
            return
        for q, (c0, c1) in enumerate(parts):
            bld.set_locality(hints.place(q + 1) if q < 3 else hints.place(0))
            bld.spawn(pfor, phase, c0, c1, place=hints.place(q))
        bld.sync()

    def set_alpha():
        state["alpha"] = state["rr"] / float(np.sum(partial))

    def set_beta():
        rr_new = float(np.sum(partial))
        state["beta"] = rr_new / state["rr"]
        state["rr"] = rr_new

    def main(bld: DagBuilder):
        for it in range(iters):
            phase_top(bld, "spmv")
            bld.work(max(1, nc), (), action=set_alpha, label=f"alpha {it}")
            phase_top(bld, "update")
            bld.work(max(1, nc), (), action=set_beta, label=f"beta {it}")
            phase_top(bld, "direction")

    dag = DagBuilder().build(main, place=hints.place(0))

    labels = np.full(space.n_blocks, -1)
    for q, (c0, c1) in enumerate(split4(0, nc)):
        if c1 <= c0:
            continue
        lo, hi = chunks[c0][0], chunks[c1 - 1][1]
        for vb in (vx, vr, vp, vap):
            labels[list(vb.footprint(lo, hi))] = q
        labels[list(vmat.footprint(A.indptr[lo], A.indptr[hi]))] = q
    partitions = label_runs(labels)

    def output():
        return x.copy()

    def oracle():
        # the updated residual must agree with the true one, and x must equal
        # the sequential iterate bit for bit (same reduction order)
        true_residual = rhs - A @ x
        scale = np.linalg.norm(rhs)
        return (np.array_equal(x, reference(A, rhs, iters, base))
                and np.linalg.norm(r - true_residual) <= 1e-9 * scale)

    return BenchInstance("cg_lite", dag, space.n_blocks, output, oracle, partitions)
