"""A disk with a wedge cut out: how much harder does it hold still?

Compares the notched particle with the full disk on the same grid.  Y_c
scales like a length, so values are rescaled to a domain of side one.

    python demos/pacman_notch.py [n]
"""
import sys

from yieldcrit import corpus
from yieldcrit.grid import Disk, GeometrySpec, build_grid, rasterize
from yieldcrit.solver import solve

n = int(sys.argv[1]) if len(sys.argv) > 1 else 128
lo, hi = 1 / 32, 31 / 32
grid = build_grid(n)

notched = rasterize(corpus.pacman(domain=(lo, hi)), grid)
full = rasterize(GeometrySpec((corpus.square(lo, hi),), (Disk((0.5, 0.5), 0.2),), name="disk"), grid)

for name, masks in (("disk", full), ("pacman", notched)):
    sol = solve(masks)
    print(f"{name:7s} solid area {masks.solid_area:.4f}  Y_c {sol.yc:.5f}  "
          f"side-1 Y_c {sol.yc / (hi - lo):.5f}  ({sol.iterations} its)")
