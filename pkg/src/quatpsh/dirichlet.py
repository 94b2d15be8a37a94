"""Dirichlet problem for the Monge-Ampère operator on the unit ball.

For one quaternionic variable the operator is the Laplacian of ``R^4``, so
``solve_n1`` is a Poisson solver on the lattice points of the unit ball with
Shortley-Weller arms at the sphere.  For several variables only the
operator itself is checked, against manufactured solutions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import bicgstab

from .fields import ScalarField
from .psh import ma_density

__all__ = [
    "BallGrid",
    "NonConvergenceError",
    "solve_n1",
    "manufactured_residual",
    "BUILTIN_CASES",
    "error_table",
]

class NonConvergenceError(RuntimeError):
    def __init__(self, message, residual, iterations):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


@dataclass
class BallGrid:
    """Lattice ``h Z^4`` intersected with the closed unit ball.

    ``values`` is indexed like the full ``[-1, 1]^4`` lattice and holds NaN
    off the open ball.  ``boundary_points`` / ``boundary_values`` are the
    points where lattice lines cross the sphere and the data there.
    """

    h: float
    axis: np.ndarray
    interior: np.ndarray
    values: np.ndarray
    boundary_points: np.ndarray
    boundary_values: np.ndarray
    iterations: int = 0
    residual: float = float("nan")
    checks: dict = field(default_factory=dict)

    @property
    def nodes(self) -> np.ndarray:
        """Coordinates of the interior nodes, shape ``(N, 4)``."""
        g = np.stack(np.meshgrid(*([self.axis] * 4), indexing="ij"), axis=-1)
        return g[self.interior]

    def interior_values(self) -> np.ndarray:
        return self.values[self.interior]


def _lattice(h: float):
    m = int(round(1.0 / h))
    if not math.isclose(m * h, 1.0, rel_tol=0, abs_tol=1e-12):
        raise ValueError("1/h must be an integer")
    axis = np.arange(-m, m + 1) * h
    g = np.stack(np.meshgrid(*([axis] * 4), indexing="ij"), axis=-1)
    r2 = np.sum(g * g, axis=-1)
    return m, axis, g, r2 < 1.0 - 1e-14


def _assemble(h, g, interior, phi):
    """Shortley-Weller matrix for the Laplacian and the boundary part of the rhs."""
    shape = interior.shape
    index = -np.ones(shape, dtype=np.int64)
    index[interior] = np.arange(interior.sum())
    pts = g[interior]
    n_int = len(pts)
    arms = []
    diag = np.zeros(n_int)
    rhs = np.zeros(n_int)
    bpts, bvals = [], []
    ids = np.argwhere(interior)
    for axis in range(4):
        for step in (1, -1):
            nb = ids.copy()
            nb[:, axis] += step
            inside = (nb[:, axis] >= 0) & (nb[:, axis] < shape[axis])
            nb_int = np.zeros(n_int, dtype=bool)
            nb_int[inside] = interior[tuple(nb[inside].T)]
            # arm length as a fraction of h: 1 for lattice neighbours, else
            # the distance to the sphere along the axis
            x = pts[:, axis]
            rest = np.sum(pts * pts, axis=1) - x * x
            reach = np.sqrt(np.maximum(1.0 - rest, 0.0))
            theta = np.where(nb_int, 1.0, np.abs(step * reach - x) / h)
            theta = np.clip(theta, 1e-12, 1.0)
            arms.append((axis, step, nb, nb_int, theta))
    out_rows, out_cols, out_vals = [], [], []
    for axis in range(4):
        plus = arms[2 * axis]
        minus = arms[2 * axis + 1]
        tp, tm = plus[4], minus[4]
        hp, hm = tp * h, tm * h
        cp = 2.0 / (hp * (hp + hm))
        cm = 2.0 / (hm * (hp + hm))
        diag -= 2.0 / (hp * hm)
        for (ax, step, nb, nb_int, theta), c in ((plus, cp), (minus, cm)):
            r = np.nonzero(nb_int)[0]
            out_rows.append(r)
            out_cols.append(index[tuple(nb[r].T)])
            out_vals.append(c[r])
            b = np.nonzero(~nb_int)[0]
            if len(b):
                q = pts[b].copy()
                q[:, ax] += step * theta[b] * h
                q /= np.linalg.norm(q, axis=1, keepdims=True)
                v = np.asarray(phi(q), dtype=float)
                rhs[b] -= c[b] * v
                bpts.append(q)
                bvals.append(v)
    out_rows.append(np.arange(n_int))
    out_cols.append(np.arange(n_int))
    out_vals.append(diag)
    a = sp.csr_matrix(
        (np.concatenate(out_vals), (np.concatenate(out_rows), np.concatenate(out_cols))),
        shape=(n_int, n_int),
    )
    bp = np.concatenate(bpts) if bpts else np.zeros((0, 4))
    bv = np.concatenate(bvals) if bvals else np.zeros(0)
    return a, rhs, bp, bv


def _as_callable(f) -> Callable:
    if isinstance(f, ScalarField):
        return lambda pts: f(pts)
    if callable(f):
        return f
    c = float(f)
    return lambda pts: np.full(len(pts), c)


def solve_n1(
    f,
    phi,
    h: float,
    *,
    rtol: float = 1e-10,
    x0=None,
    max_iter: int | None = None,
) -> BallGrid:
    """Solve ``Laplacian u = f`` in the unit ball of ``H``, ``u = phi`` on the sphere.

    Parameters
    ----------
    f, phi : ScalarField, callable on ``(P, 4)`` points, or constant
        ``f`` must be non-negative on the ball.
    h : float
        Lattice spacing with ``1/h`` integer.
    rtol : float
        Required relative residual ``|b - A u| / |b|``.
    x0 : array_like or {"zero", "random"}, optional
        Initial iterate on the interior nodes.
    max_iter : int, optional
        Defaults to ``10 * sqrt(number of interior nodes)``.

    Raises
    ------
    ValueError
        If ``f`` is negative somewhere on the lattice.
    NonConvergenceError
        If the iteration cap is hit before reaching ``rtol``.
    """
    f_call, phi_call = _as_callable(f), _as_callable(phi)
    _, axis, g, interior = _lattice(h)
    pts = g[interior]
    fv = np.asarray(f_call(pts), dtype=float)
    if np.any(fv < 0.0):
        raise ValueError(f"right-hand side is negative (min {fv.min():.3e}); not a Monge-Ampere datum")
    a, rhs_b, bp, bv = _assemble(h, g, interior, phi_call)
    rhs = fv + rhs_b
    n_int = len(pts)
    cap = max_iter or int(10 * math.sqrt(n_int))
    if x0 is None or (isinstance(x0, str) and x0 == "zero"):
        start = np.zeros(n_int)
    elif isinstance(x0, str) and x0 == "random":
        start = np.random.default_rng(12345).standard_normal(n_int)
    else:
        start = np.asarray(x0, dtype=float)
    count = [0]

    def cb(_):
        count[0] += 1

    # the Shortley-Weller rows make the matrix nonsymmetric
    sol, info = bicgstab(a, rhs, x0=start, rtol=0.01 * rtol, atol=0.0, maxiter=cap, callback=cb)
    res = float(np.linalg.norm(rhs - a @ sol) / max(np.linalg.norm(rhs), 1e-300))
    if res > rtol:
        raise NonConvergenceError(
            f"no convergence after {count[0]} iterations (relative residual {res:.3e})", res, count[0]
        )
    values = np.full(interior.shape, np.nan)
    values[interior] = sol
    out = BallGrid(h, axis, interior, values, bp, bv, count[0], res)
    out.checks = _post_checks(out, h, fv)
    return out


def _post_checks(grid: BallGrid, h: float, fv) -> dict:
    u = grid.values
    checks = {}
    # discrete maximum principle for Laplacian u = f >= 0
    bmax = float(np.max(grid.boundary_values)) if grid.boundary_values.size else -np.inf
    umax = float(np.nanmax(u))
    checks["max_principle"] = bool(umax <= bmax + 1e-9 * max(1.0, abs(bmax)))
    # 1x1 Hessian (Laplacian) on nodes whose lattice neighbours are all interior
    c = u[1:-1, 1:-1, 1:-1, 1:-1]
    lap = np.zeros_like(c)
    for ax in range(4):
        sl_p = [slice(1, -1)] * 4
        sl_m = [slice(1, -1)] * 4
        sl_p[ax] = slice(2, None)
        sl_m[ax] = slice(None, -2)
        lap += u[tuple(sl_p)] - 2.0 * c + u[tuple(sl_m)]
    lap /= h * h
    ok = np.isfinite(lap)
    scale = max(1.0, float(np.max(np.abs(fv)))) if fv.size else 1.0
    checks["psh"] = bool(np.all(lap[ok] >= -10.0 * h * h * scale))
    return checks


def manufactured_residual(u: ScalarField, f_expected, samples) -> float:
    """``sup |det(Hessian u) - f_expected|`` over sample points (any ``n``)."""
    pts = u._points(samples)
    dens = ma_density(u)(pts)
    target = np.asarray(_as_callable(f_expected)(pts), dtype=float)
    return float(np.max(np.abs(dens - target))) if len(pts) else 0.0


def _norm2(p):
    return np.sum(np.asarray(p) ** 2, axis=-1)


# name -> (f, phi, exact solution)
BUILTIN_CASES: dict[str, tuple[Callable, Callable, Callable]] = {
    "harmonic-t": (lambda p: np.zeros(len(p)), lambda p: p[:, 0], lambda p: p[:, 0]),
    "harmonic-quadratic": (
        lambda p: np.zeros(len(p)),
        lambda p: p[:, 0] ** 2 - p[:, 1] ** 2 + p[:, 2] * p[:, 3],
        lambda p: p[:, 0] ** 2 - p[:, 1] ** 2 + p[:, 2] * p[:, 3],
    ),
    "constant": (lambda p: np.zeros(len(p)), lambda p: np.ones(len(p)), lambda p: np.ones(len(p))),
    "norm-sq": (lambda p: np.full(len(p), 8.0), lambda p: np.ones(len(p)), _norm2),
    "norm-quartic": (lambda p: 24.0 * _norm2(p), lambda p: np.ones(len(p)), lambda p: _norm2(p) ** 2),
}


def error_table(case: str, hs, **solve_kw) -> list[tuple[float, float, float, int]]:
    """Rows ``(h, sup_error, l2_error, iterations)`` for a built-in case."""
    f, phi, exact = BUILTIN_CASES[case]
    rows = []
    for h in hs:
        sol = solve_n1(f, phi, h, **solve_kw)
        err = sol.interior_values() - exact(sol.nodes)
        rows.append((float(h), float(np.max(np.abs(err))), float(np.sqrt(np.sum(err**2) * h**4)), sol.iterations))
    return rows
