"""Strassen matrix multiplication: 7-way recursion with temporaries.

With ``top8`` the outermost level instead runs the eight classical quadrant
products in parallel and sums pairs, trading extra work for products whose
output quadrant is known up front (and so can carry a locality hint).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..dag import DagBuilder
from .base import BenchInstance, BenchmarkSpec, BlockSpace, Hints, MatrixBlocks, label_runs


@dataclass(frozen=True)
class MatRef:
    """Square view ``arr[r0:r0+m, c0:c0+m]`` plus its block map."""

    arr: np.ndarray
    blocks: MatrixBlocks
    r0: int
    c0: int
    m: int

    def view(self) -> np.ndarray:
        return self.arr[self.r0:self.r0 + self.m, self.c0:self.c0 + self.m]

    def quad(self, i: int, j: int) -> "MatRef":
        h = self.m // 2
        return MatRef(self.arr, self.blocks, self.r0 + i * h, self.c0 + j * h, h)

    def footprint(self) -> tuple:
        return self.blocks.footprint(self.r0, self.r0 + self.m, self.c0, self.c0 + self.m)


# (terms of A, terms of B, signed contributions to C quadrants) per product
PRODUCTS = [
    # M1 = (A11 + A22)(B11 + B22)
    ([((0, 0), 1), ((1, 1), 1)], [((0, 0), 1), ((1, 1), 1)], [((0, 0), 1), ((1, 1), 1)]),
    # M2 = (A21 + A22) B11
    ([((1, 0), 1), ((1, 1), 1)], [((0, 0), 1)], [((1, 0), 1), ((1, 1), -1)]),
    # M3 = A11 (B12 - B22)
    ([((0, 0), 1)], [((0, 1), 1), ((1, 1), -1)], [((0, 1), 1), ((1, 1), 1)]),
    # M4 = A22 (B21 - B11)
    ([((1, 1), 1)], [((1, 0), 1), ((0, 0), -1)], [((0, 0), 1), ((1, 0), 1)]),
    # M5 = (A11 + A12) B22
    ([((0, 0), 1), ((0, 1), 1)], [((1, 1), 1)], [((0, 0), -1), ((0, 1), 1)]),
    # M6 = (A21 - A11)(B11 + B12)
    ([((1, 0), 1), ((0, 0), -1)], [((0, 0), 1), ((0, 1), 1)], [((1, 1), 1)]),
    # M7 = (A12 - A22)(B21 + B22)
    ([((0, 1), 1), ((1, 1), -1)], [((1, 0), 1), ((1, 1), 1)], [((0, 0), 1)]),
]

QUADS = ((0, 0), (0, 1), (1, 0), (1, 1))


def _lincomb(refs, terms, out: np.ndarray):
    (q0, s0), rest = terms[0], terms[1:]
    np.multiply(refs.quad(*q0).view(), s0, out=out)
    for q, s in rest:
        if s > 0:
            out += refs.quad(*q).view()
        else:
            out -= refs.quad(*q).view()


def build(spec: BenchmarkSpec, places: int) -> BenchInstance:
    n, base = spec.n, spec.base_case
    top8 = bool(spec.param("top8", False))
    hints = Hints(spec, places)
    layout = spec.layout
    rng = np.random.default_rng(int(spec.param("data_seed", 3)))
    A = rng.standard_normal((n, n))
    B = rng.standard_normal((n, n))
    C = np.zeros((n, n))

    space = BlockSpace(base * base)
    top_refs = [MatRef(M, space.matrix(name, n, layout, base), 0, 0, n)
                for name, M in (("A", A), ("B", B), ("C", C))]

    def temp(name: str, m: int) -> MatRef:
        return MatRef(np.zeros((m, m)), space.matrix(name, m, layout, base), 0, 0, m)

    def mul_cost(m):
        return max(1, m ** 3 // 16)

    def add_cost(m, k=1):
        return max(1, k * m * m // 4)

    def multiply(bld: DagBuilder, c: MatRef, a: MatRef, b: MatRef, tag: str):
        m = c.m
        if m <= base:
            def act():
                np.matmul(a.view(), b.view(), out=c.view())
            blocks = sorted(set(a.footprint()) | set(b.footprint()) | set(c.footprint()))
            bld.work(mul_cost(m), blocks, action=act, label=f"mul {tag}")
            return
        h = m // 2
        prods = [temp(f"{tag}.M{i}", h) for i in range(7)]
        for i, (ta, tb, _) in enumerate(PRODUCTS):
            bld.spawn(product, prods[i], a, b, ta, tb, f"{tag}.{i}")
        bld.sync()
        for i in range(2):
            for j in range(2):
                bld.spawn(combine, c.quad(i, j), (i, j), prods)
        bld.sync()

    def product(bld: DagBuilder, out: MatRef, a: MatRef, b: MatRef, ta, tb, tag):
        h = out.m
        sa = temp(f"{tag}.S", h) if len(ta) > 1 else a.quad(*ta[0][0])
        sb = temp(f"{tag}.T", h) if len(tb) > 1 else b.quad(*tb[0][0])
        if len(ta) > 1 or len(tb) > 1:
            def act():
                if len(ta) > 1:
                    _lincomb(a, ta, sa.view())
                if len(tb) > 1:
                    _lincomb(b, tb, sb.view())
            touched = set(out.footprint())
            if len(ta) > 1:
                touched |= set(sa.footprint())
                for q, _ in ta:
                    touched |= set(a.quad(*q).footprint())
            if len(tb) > 1:
                touched |= set(sb.footprint())
                for q, _ in tb:
                    touched |= set(b.quad(*q).footprint())
            bld.work(add_cost(h, (len(ta) > 1) + (len(tb) > 1)), sorted(touched),
                     action=act, label=f"operands {tag}")
        multiply(bld, out, sa, sb, tag)

    def combine(bld: DagBuilder, cq: MatRef, which, prods):
        terms = [(i, s) for i, (_, _, contrib) in enumerate(PRODUCTS) for q, s in contrib if q == which]

        def act():
            v = cq.view()
            v[...] = 0.0
            for i, s in terms:
                if s > 0:
                    v += prods[i].view()
                else:
                    v -= prods[i].view()
        touched = set(cq.footprint())
        for i, _ in terms:
            touched |= set(prods[i].footprint())
        bld.work(add_cost(cq.m, len(terms)), sorted(touched), action=act, label="combine")

    def eight_way(bld: DagBuilder, c: MatRef, a: MatRef, b: MatRef):
        h = n // 2
        partials = {}
        for i, j in QUADS:
            for k in range(2):
                partials[i, j, k] = temp(f"P{i}{j}{k}", h)
        for q, (i, j) in enumerate(QUADS):
            if hints.enabled:
                bld.set_locality(hints.place(q))
            for k in range(2):
                bld.spawn(multiply, partials[i, j, k], a.quad(i, k), b.quad(k, j), f"C{i}{j}.{k}",
                          place=hints.place(q) if hints.enabled else None)
        bld.sync()
        for q, (i, j) in enumerate(QUADS):
            bld.spawn(add_pair, c.quad(i, j), partials[i, j, 0], partials[i, j, 1],
                      place=hints.place(q) if hints.enabled else None)
        bld.sync()

    def add_pair(bld: DagBuilder, cq: MatRef, p0: MatRef, p1: MatRef):
        def act():
            np.add(p0.view(), p1.view(), out=cq.view())
        touched = set(cq.footprint()) | set(p0.footprint()) | set(p1.footprint())
        bld.work(add_cost(cq.m, 2), sorted(touched), action=act, label="sum pair")

    a_ref, b_ref, c_ref = top_refs
    if top8 and n > base:
        dag = DagBuilder().build(eight_way, c_ref, a_ref, b_ref, place=hints.place(0))
    else:
        dag = DagBuilder().build(multiply, c_ref, a_ref, b_ref, "C", place=hints.place(0))

    labels = np.full(space.n_blocks, -1)
    if n > base:
        rows, cols = np.indices((n, n))
        quad = 2 * (rows >= n // 2) + 1 * (cols >= n // 2)
        for ref in top_refs:
            labels[ref.blocks.blockmap.ravel()] = quad.ravel()
    partitions = label_runs(labels)

    def output():
        return C.copy()

    def oracle():
        return np.allclose(C, A @ B, rtol=1e-9, atol=1e-9 * n)

    return BenchInstance("strassen", dag, space.n_blocks, output, oracle, partitions)
