"""Array layouts (row-major, Morton, blocked Z-Morton) and data placement policies."""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence, Tuple, Union

import numpy as np

from .topology import ANY, Topology, TopologyError

MORTON_BITS = 16


def _spread(v: int) -> int:
    v &= 0xFFFF
    v = (v | (v << 8)) & 0x00FF00FF
    v = (v | (v << 4)) & 0x0F0F0F0F
    v = (v | (v << 2)) & 0x33333333
    v = (v | (v << 1)) & 0x55555555
    return v


def _compact(v: int) -> int:
    v &= 0x55555555
    v = (v | (v >> 1)) & 0x33333333
    v = (v | (v >> 2)) & 0x0F0F0F0F
    v = (v | (v >> 4)) & 0x00FF00FF
    v = (v | (v >> 8)) & 0x0000FFFF
    return v


def morton_encode(x: int, y: int, bits: int = MORTON_BITS) -> int:
    """Interleave bits: x on even positions (bit 0 = x bit 0), y on odd."""
    if bits > MORTON_BITS:
        raise ValueError(f"at most {MORTON_BITS} bits per coordinate")
    limit = 1 << bits
    if not (0 <= x < limit and 0 <= y < limit):
        raise OverflowError(f"({x}, {y}) outside {bits}-bit range")
    return _spread(x) | (_spread(y) << 1)


def morton_decode(z: int, bits: int = MORTON_BITS) -> Tuple[int, int]:
    if not 0 <= z < 1 << (2 * bits):
        raise OverflowError(f"{z} outside {2 * bits}-bit range")
    return _compact(z), _compact(z >> 1)


def morton_encode_array(x, y) -> np.ndarray:
    """Vectorized :func:`morton_encode` for arrays of 16-bit coordinates."""
    x = np.asarray(x, dtype=np.uint64)
    y = np.asarray(y, dtype=np.uint64)
    if (x >> MORTON_BITS).any() or (y >> MORTON_BITS).any():
        raise OverflowError("coordinates exceed 16 bits")

    def spread(v):
        v = (v | (v << np.uint64(8))) & np.uint64(0x00FF00FF)
        v = (v | (v << np.uint64(4))) & np.uint64(0x0F0F0F0F)
        v = (v | (v << np.uint64(2))) & np.uint64(0x33333333)
        v = (v | (v << np.uint64(1))) & np.uint64(0x55555555)
        return v

    return (spread(x) | (spread(y) << np.uint64(1))).astype(np.int64)


class LayoutKind(str, enum.Enum):
    ROW_MAJOR = "row-major"
    MORTON = "morton"
    BLOCKED = "blocked"


def _is_pow2(v: int) -> bool:
    return v > 0 and v & (v - 1) == 0


@dataclass(frozen=True)
class BlockedLayout:
    """n x n matrix stored as b x b row-major tiles in Z order of tile coordinates.

    ``kind`` ROW_MAJOR ignores b for indexing; MORTON is the b = 1 case.
    """

    n: int
    b: int
    kind: LayoutKind = LayoutKind.BLOCKED

    def __post_init__(self):
        object.__setattr__(self, "kind", LayoutKind(self.kind))
        if self.kind is LayoutKind.MORTON:
            object.__setattr__(self, "b", 1)
        if not _is_pow2(self.n):
            raise ValueError("matrix dimension must be a power of two (pad otherwise)")
        if not _is_pow2(self.b) or self.n % self.b:
            raise ValueError("block size must be a power of two dividing n")

    def index(self, row: int, col: int) -> int:
        return blocked_index(self, row, col)

    def offsets(self) -> np.ndarray:
        """Linear offset of every cell, shape (n, n)."""
        n, b = self.n, self.b
        rows, cols = np.indices((n, n))
        if self.kind is LayoutKind.ROW_MAJOR:
            return rows * n + cols
        tile = morton_encode_array(cols // b, rows // b)
        return tile * (b * b) + (rows % b) * b + (cols % b)

    def pack(self, matrix: np.ndarray) -> np.ndarray:
        flat = np.empty(self.n * self.n, dtype=matrix.dtype)
        flat[self.offsets().ravel()] = matrix.ravel()
        return flat

    def unpack(self, flat: np.ndarray) -> np.ndarray:
        return flat[self.offsets()]


def blocked_index(layout: BlockedLayout, row: int, col: int) -> int:
    n, b = layout.n, layout.b
    if not (0 <= row < n and 0 <= col < n):
        raise IndexError(f"({row}, {col}) outside {n}x{n}")
    if layout.kind is LayoutKind.ROW_MAJOR:
        return row * n + col
    return morton_encode(col // b, row // b) * b * b + (row % b) * b + (col % b)


# -- placement of data blocks onto socket DRAMs -----------------------------------

class PolicyKind(str, enum.Enum):
    FIRST_TOUCH = "first-touch"
    INTERLEAVE = "interleave"
    PARTITIONED = "partitioned"


@dataclass(frozen=True)
class PlacementPolicy:
    kind: PolicyKind = PolicyKind.FIRST_TOUCH
    ranges: Tuple[Tuple[int, int, int], ...] = ()   # (start, stop, place), half-open

    @classmethod
    def first_touch(cls):
        return cls(PolicyKind.FIRST_TOUCH)

    @classmethod
    def interleave(cls):
        return cls(PolicyKind.INTERLEAVE)

    @classmethod
    def partitioned(cls, ranges: Sequence[Tuple[int, int, int]]):
        return cls(PolicyKind.PARTITIONED, tuple((int(a), int(b), int(p)) for a, b, p in ranges))


def assign_places(blocks: Union[int, Sequence[int]], policy: PlacementPolicy,
                  topology: Topology) -> list:
    """DRAM owner per block id; ANY entries are resolved by first touch."""
    n_blocks = blocks if isinstance(blocks, int) else (max(blocks) + 1 if len(blocks) else 0)
    owners = [ANY] * n_blocks
    kind = PolicyKind(policy.kind)
    if kind is PolicyKind.INTERLEAVE:
        owners = [i % topology.socket_count for i in range(n_blocks)]
    elif kind is PolicyKind.PARTITIONED:
        for start, stop, place in policy.ranges:
            if place != ANY and not 0 <= place < topology.socket_count:
                raise TopologyError(f"partition maps blocks {start}:{stop} to invalid place {place}")
            for i in range(max(0, start), min(stop, n_blocks)):
                owners[i] = place
    return owners
