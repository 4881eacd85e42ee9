"""Critical yield number of one square particle, step by step.

Rasterize the reference geometry, solve the limit problem, check the
quotient certificate and look at the three-value structure of the optimum.

    python demos/reference_walkthrough.py [n]
"""
import sys

import numpy as np

from yieldcrit import corpus
from yieldcrit.analysis import quantize_three
from yieldcrit.calculus import discrete_tv
from yieldcrit.grid import build_grid, rasterize
from yieldcrit.solver import compute_yc, solve

n = int(sys.argv[1]) if len(sys.argv) > 1 else 64
masks = rasterize(corpus.reference(), build_grid(n))
print(f"n = {n}: {masks.fluid.sum()} fluid cells, {masks.solid.sum()} solid cells")

sol = solve(masks)
print(f"Y_c = {sol.yc:.6f} after {sol.iterations} iterations (converged: {sol.converged})")

# the reported number is a quotient of the returned field, nothing more
h = masks.grid.h
print(f"solid integral / TV = {h * h * sol.v[masks.solid].sum() / discrete_tv(sol.v, h):.6f}")
print(f"compute_yc(v)       = {compute_yc(sol.v, masks):.6f}")

# the optimum is close to a field taking 0 and two other values
q = quantize_three(sol.v, masks)
print(f"plateaus: beta+ = {q.beta_plus:.4f} on {q.positive_set.sum()} cells, "
      f"beta- = {q.beta_minus:.4f} on {q.negative_set.sum()} cells")
print(f"TV ratio quantized/original = {q.tv_ratio:.4f}")

# crude terminal picture: + plug moving with the particle, - backflow, . still
img = np.full(masks.grid.shape, " ")
img[q.positive_set] = "+"
img[q.negative_set] = "-"
img[masks.fluid & ~q.positive_set & ~q.negative_set] = "."
step = max(1, n // 32)
for row in img[::step, ::-step].T:
    print("".join(row))
