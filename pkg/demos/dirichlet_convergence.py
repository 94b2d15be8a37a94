"""Poisson/Monge-Ampere Dirichlet problem on the unit ball of H, one variable."""

import numpy as np

from quatpsh.dirichlet import error_table

hs = [1 / 8, 1 / 12, 1 / 16]
for case in ("norm-sq", "norm-quartic", "harmonic-quadratic"):
    rows = error_table(case, hs)
    print(case)
    for h, sup, l2, its in rows:
        print(f"  h = 1/{round(1 / h):<3} sup error {sup:.3e}  l2 error {l2:.3e}  iterations {its}")
    errs = [r[1] for r in rows]
    if min(errs) > 1e-8:
        print(f"  observed order {np.polyfit(np.log(hs), np.log(errs), 1)[0]:.2f}")
