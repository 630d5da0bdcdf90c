import numpy as np
import pytest
from hypothesis import given, strategies as st

from worksteal.layout import (
    BlockedLayout, LayoutKind, PlacementPolicy, assign_places, blocked_index, morton_decode,
    morton_encode, morton_encode_array,
)
from worksteal.topology import ANY, TopologyError, make_topology


def brute_morton(x, y, bits=8):
    z = 0
    for i in range(bits):
        z |= ((x >> i) & 1) << (2 * i)
        z |= ((y >> i) & 1) << (2 * i + 1)
    return z


def test_morton_examples():
    assert morton_encode(0, 0) == 0
    assert morton_encode(1, 0) == 1
    assert morton_encode(0, 1) == 2
    assert morton_encode(3, 5) == 39


def test_morton_matches_brute_force_grid():
    xs, ys = np.meshgrid(np.arange(64), np.arange(64))
    fast = morton_encode_array(xs, ys)
    for x in range(64):
        for y in range(64):
            assert morton_encode(x, y) == brute_morton(x, y) == fast[y, x]


@given(st.integers(0, 2**16 - 1), st.integers(0, 2**16 - 1))
def test_morton_round_trip(x, y):
    assert morton_decode(morton_encode(x, y)) == (x, y)


def test_morton_overflow():
    with pytest.raises(OverflowError):
        morton_encode(1 << 16, 0)
    with pytest.raises(OverflowError):
        morton_encode(4, 0, bits=2)
    with pytest.raises(OverflowError):
        morton_decode(-1)
    with pytest.raises(OverflowError):
        morton_encode_array([1 << 16], [0])


def test_blocked_index_example():
    lay = BlockedLayout(4, 2)
    assert blocked_index(lay, 2, 3) == 13
    assert lay.index(2, 3) == 13


def test_degenerate_blockings():
    n = 8
    one_block = BlockedLayout(n, n)
    assert all(one_block.index(r, c) == r * n + c for r in range(n) for c in range(n))
    cells = BlockedLayout(n, 1)
    assert all(cells.index(r, c) == morton_encode(c, r) for r in range(n) for c in range(n))
    assert BlockedLayout(n, 4, "morton").b == 1
    rm = BlockedLayout(n, 4, LayoutKind.ROW_MAJOR)
    assert rm.index(3, 5) == 29


def test_offsets_agree_with_scalar_index():
    lay = BlockedLayout(16, 4)
    off = lay.offsets()
    assert all(off[r, c] == lay.index(r, c) for r in range(16) for c in range(16))


@pytest.mark.parametrize("kind", list(LayoutKind))
def test_pack_unpack_round_trip(kind):
    lay = BlockedLayout(16, 4, kind)
    m = np.arange(256.0).reshape(16, 16)
    assert np.array_equal(lay.unpack(lay.pack(m)), m)


def test_block_cells_occupy_one_aligned_range():
    n, b = 32, 8
    off = BlockedLayout(n, b).offsets()
    for br in range(0, n, b):
        for bc in range(0, n, b):
            cells = np.sort(off[br:br + b, bc:bc + b].ravel())
            assert cells[0] % (b * b) == 0
            assert np.array_equal(cells, np.arange(cells[0], cells[0] + b * b))


@pytest.mark.parametrize("n,b", [(6, 2), (8, 3), (8, 16)])
def test_invalid_layouts(n, b):
    with pytest.raises(ValueError):
        BlockedLayout(n, b)


def test_index_out_of_range():
    with pytest.raises(IndexError):
        blocked_index(BlockedLayout(4, 2), 4, 0)


def test_interleave_owners():
    topo = make_topology(4, 8, 32)
    assert assign_places(8, PlacementPolicy.interleave(), topo) == [0, 1, 2, 3, 0, 1, 2, 3]


def test_partitioned_quarters_and_fallback():
    topo = make_topology(4, 8, 32)
    pol = PlacementPolicy.partitioned([(0, 4, 0), (4, 8, 1), (8, 12, 2)])
    owners = assign_places(16, pol, topo)
    assert owners == [0] * 4 + [1] * 4 + [2] * 4 + [ANY] * 4
    with pytest.raises(TopologyError):
        assign_places(4, PlacementPolicy.partitioned([(0, 4, 7)]), topo)


def test_first_touch_leaves_owners_open():
    topo = make_topology(4, 8, 1)
    assert assign_places([0, 3], PlacementPolicy.first_touch(), topo) == [ANY] * 4
