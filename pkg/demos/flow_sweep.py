"""Viscous flow of two disks as the yield number approaches Y_c.

Below Y_c the particles sink and the Dirichlet energy stays under the
bound |fluid| (Y_c - Y)^2; at and above Y_c everything stops.

    python demos/flow_sweep.py [n]
"""
import sys

import numpy as np

from yieldcrit import corpus
from yieldcrit.flow import critical_yield_number, rate_bound, sweep_to_critical
from yieldcrit.grid import build_grid, rasterize
from yieldcrit.projections import component_velocities

n = int(sys.argv[1]) if len(sys.argv) > 1 else 32
masks = rasterize(corpus.two_disks(), build_grid(n))
yc = critical_yield_number(masks)
print(f"Y_c = {yc:.5f}")

fractions = [0.0, 0.25, 0.5, 0.75, 0.9, 1.0, 1.05]
res = sweep_to_critical(masks, [f * yc for f in fractions], yc=yc)
print(" Y/Y_c   dirichlet      bound          max|omega|  particle velocities")
for f, r, s in zip(fractions, res.rows, res.solutions):
    vel = " ".join(f"{u:+.2e}" for u in component_velocities(s.omega, masks))
    print(f"{f:6.2f}  {r.dirichlet:.3e}  {rate_bound(r.Y, yc, res.fluid_area):.3e}  "
          f"{np.abs(s.omega).max():.3e}   {vel}")
print(f"TV nonincreasing in Y: {res.tv_nonincreasing}")
