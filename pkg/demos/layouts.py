"""Row-major, Morton and blocked Z-Morton layouts of a small matrix.

    python demos/layouts.py
"""
import numpy as np

from worksteal.layout import BlockedLayout, morton_decode, morton_encode


def show(title, offsets):
    print(title)
    for row in offsets:
        print("  " + " ".join(f"{v:3d}" for v in row))
    print()


if __name__ == "__main__":
    n = 8
    show("row-major offsets", BlockedLayout(n, n, "row-major").offsets())
    show("Morton offsets (b = 1): the Z curve visits every element", BlockedLayout(n, 1, "morton").offsets())
    lay = BlockedLayout(n, 4, "blocked")
    show("blocked, 4x4 tiles in Z order, row-major inside each tile", lay.offsets())

    print("morton_encode(3, 5) =", morton_encode(3, 5), "and decodes back to", morton_decode(39))
    m = np.arange(n * n).reshape(n, n)
    flat = lay.pack(m)
    print("the first tile occupies flat[0:16]:", flat[:16].tolist())
    assert np.array_equal(lay.unpack(flat), m)
