"""Valuation of a cube under translation and scaling (one quaternionic variable, k = 1)."""

import numpy as np

from quatpsh.convex import Box
from quatpsh.valuations import ValuationSpec, valuation

spec = ValuationSpec(n=1, k=1, n_samples=2**14, seed=3)
cube = Box.cube(4, 0.5)
base = valuation(cube, spec)
print(f"cube:            {base.value:.6f} +- {base.stderr:.6f}")
moved = valuation(cube.translate(np.array([0.3, -1.0, 2.0, 0.5])), spec)
print(f"translated cube: {moved.value:.6f} +- {moved.stderr:.6f}")
for lam in (0.5, 2.0):
    v = valuation(cube.scale(lam), spec)
    print(f"scaled by {lam}:   {v.value:.6f}  vs  {lam} x base = {lam * base.value:.6f}")
