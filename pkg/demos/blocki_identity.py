"""Max/min identity for mollified support functions of two half-disks.

The union of the two half-disks is the full disk, so max(h1, h2) and min(h1, h2)
are support functions of convex bodies.  The residual of the mollified identity
should shrink as the mollification radius does; a nested pair gives exactly zero.
Takes about a minute.
"""

import time

from quatpsh.cli import blocki_pair, blocki_weight
from quatpsh.psh import blocki_residual

psi = blocki_weight()
f, g = blocki_pair("half-disks", 32)
print("lattice points:", f.values.size)
for delta in (0.2, 0.1, 0.05):
    start = time.perf_counter()
    res = blocki_residual(f, g, None, psi, delta)
    print(f"delta = {delta:<5} residual = {res:.4e}   ({time.perf_counter() - start:.1f} s)")

fn, gn = blocki_pair("nested", 32)
print("nested pair, delta = 0.1:", blocki_residual(fn, gn, None, psi, 0.1))
