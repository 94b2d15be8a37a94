"""Plurisubharmonicity tests and (mixed) Monge-Ampère densities.

Point-based fields (polynomial / AD) are handled at sample points.  Grid
fields cover ``H^1`` or a four-dimensional coordinate slice of ``H^n``; for
those the module also provides kernel mollification and the weak pairings
``int MA(u * rho_delta) psi``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.signal import fftconvolve

from .dirac import hessian
from .fields import GridField, SampledField, ScalarField
from .hyperherm import is_positive_definite, mixed_discriminant, moore_det, real_embedding
from .quaternion import left_matrix

__all__ = [
    "PshVerdict",
    "WeightField",
    "is_psh_hessian",
    "is_subharmonic_on_line",
    "ma_density",
    "mixed_ma_density",
    "mollifier_kernel",
    "mollify",
    "ma_integral_mollified",
    "ma_pairing",
    "weak_convergence_slope",
    "blocki_residual",
    "tensor_bump",
    "radial_bump",
    "results_csv_rows",
]


@dataclass(frozen=True)
class PshVerdict:
    """Outcome of a plurisubharmonicity test.

    ``witness`` is ``(point, eigenvalue)`` at the first failing sample, where
    ``eigenvalue`` is the smallest eigenvalue of the real embedding of the
    Hessian there.
    """

    is_psh: bool
    is_strict: bool
    witness: tuple | None = None

    def __post_init__(self):
        if self.is_strict and not self.is_psh:
            raise ValueError("a strict verdict must also be psh")
        if (self.witness is None) != self.is_psh:
            raise ValueError("witness is required exactly when the field is not psh")


@dataclass
class WeightField:
    """Matrix weights ``V_1..V_m`` and a scalar weight ``psi``.

    Each matrix weight maps points ``(P, 4n)`` to hyperhermitian matrices
    ``(P, n, n, 4)``; ``psi`` maps points to ``(P,)``.
    """

    n: int
    matrices: list = field(default_factory=list)
    psi: Callable | None = None

    @classmethod
    def constant(cls, n: int, mats: Sequence = (), psi: Callable | None = None) -> "WeightField":
        fixed = [np.asarray(m, dtype=float) for m in mats]
        for m in fixed:
            if m.shape != (n, n, 4):
                raise ValueError(f"weight matrix must have shape {(n, n, 4)}")

        def const(m):
            return lambda pts: np.broadcast_to(m, (len(pts),) + m.shape)

        return cls(n, [const(m) for m in fixed], psi)

    def evaluate(self, points) -> list[np.ndarray]:
        pts = np.asarray(points, dtype=float)
        return [np.asarray(v(pts), dtype=float) for v in self.matrices]


def _pd_mask(h, rtol=1e-12) -> np.ndarray:
    return np.array([is_positive_definite(m, rtol) for m in h], dtype=bool)


def is_psh_hessian(f: ScalarField, samples) -> PshVerdict:
    """Test (strict) plurisubharmonicity of a real C^2 field at sample points.

    Non-strictness is decided by Sylvester's criterion on ``H + eps Id`` with
    ``eps = 1e-10 * max(1, max|H|)``.
    """
    pts = f._points(samples)
    h = hessian(f)(pts)
    n = f.n
    strict = _pd_mask(h).all()
    eye = np.zeros((n, n, 4))
    eye[np.arange(n), np.arange(n), 0] = 1.0
    eps = 1e-10 * np.maximum(1.0, np.abs(h).reshape(len(h), -1).max(axis=1))
    ok = _pd_mask(h + eps[:, None, None, None] * eye)
    if ok.all():
        return PshVerdict(True, bool(strict))
    bad = int(np.argmin(ok))
    lam = float(np.linalg.eigvalsh(real_embedding(h[bad]))[0])
    return PshVerdict(False, False, (pts[bad].copy(), lam))


def is_subharmonic_on_line(f: ScalarField, a, b, samples, tol: float = 1e-9) -> bool:
    """Check ``Laplacian_lambda f(a + b lambda) >= -tol * scale`` at the sampled ``lambda``.

    ``a`` and ``b`` are points of ``H^n`` given as ``(n, 4)`` arrays (or
    flattened), ``samples`` are quaternions ``lambda`` of shape ``(P, 4)``.
    """
    n = f.n
    a = np.asarray(a, dtype=float).reshape(4 * n)
    b = np.asarray(b, dtype=float).reshape(n, 4)
    lam = np.asarray(samples, dtype=float).reshape(-1, 4)
    # d(a + b lambda)/d(lambda) as a real 4n x 4 matrix
    jac = np.concatenate([left_matrix(b[i]) for i in range(n)], axis=0)
    pts = a + lam @ jac.T
    hr = f.real_hessian(pts)
    lap = np.einsum("ra,prs,sa->p", jac, hr, jac)
    scale = np.maximum(1.0, np.abs(hr).reshape(len(hr), -1).max(axis=1)) * max(1.0, np.abs(jac).max() ** 2)
    return bool(np.all(lap >= -tol * scale))


def _grid_weight_values(w: WeightField, grid: GridField) -> list[np.ndarray]:
    pts = grid.points().reshape(-1, 4 * grid.n)
    return [v.reshape(grid.shape + v.shape[1:]) for v in w.evaluate(pts)]


def ma_density(u: ScalarField):
    """Pointwise Moore determinant of the Hessian of ``u``.

    Returns a :class:`GridField` (NaN on the band where differences are
    undefined) for grid input, otherwise a :class:`SampledField`.
    """
    hf = hessian(u)
    if isinstance(u, GridField):
        return u.like(moore_det(hf.grid))
    return SampledField(lambda pts: moore_det(hf(pts)), u.n)


def mixed_ma_density(us: Sequence[ScalarField], weights: WeightField | None = None):
    """Mixed discriminant of the Hessians of ``us`` and the matrix weights."""
    us = list(us)
    if not us:
        raise ValueError("need at least one field")
    n = us[0].n
    weights = weights if weights is not None else WeightField(n)
    if len(us) + len(weights.matrices) != n:
        raise ValueError(
            f"{len(us)} fields and {len(weights.matrices)} weights do not add up to n = {n}"
        )
    if isinstance(us[0], GridField):
        hs = [hessian(u).grid for u in us]
        vs = _grid_weight_values(weights, us[0])
        return us[0].like(mixed_discriminant(hs + vs))
    hfs = [hessian(u) for u in us]

    def func(pts):
        return mixed_discriminant([hf(pts) for hf in hfs] + weights.evaluate(pts))

    return SampledField(func, n)


def mollifier_kernel(delta: float, h: float) -> np.ndarray:
    """Normalized lattice kernel ``(1 - r^2/delta^2)^3`` on ``r < delta``."""
    if delta < 2 * h * (1 - 1e-12):
        raise ValueError(f"delta = {delta} under-resolves the kernel on spacing h = {h}")
    r = int(math.floor(delta / h + 1e-9))
    ax = np.arange(-r, r + 1) * h
    g = np.meshgrid(ax, ax, ax, ax, indexing="ij")
    s = sum(c * c for c in g) / delta**2
    k = np.where(s < 1.0, (1.0 - s) ** 3, 0.0)
    return k / k.sum()


def mollify(u: GridField, delta: float) -> GridField:
    """Convolve a grid field with the bump kernel of radius ``delta``.

    Nodes closer than the kernel radius to the lattice edge become NaN.
    """
    if u.quaternionic:
        raise ValueError("mollify expects a real grid field")
    if not np.all(np.isfinite(u.values)):
        raise ValueError("mollify needs finite values at every node")
    k = mollifier_kernel(delta, u.h)
    r = k.shape[0] // 2
    out = fftconvolve(u.values, k, mode="same")
    band = np.full(u.shape, np.nan)
    inner = tuple(slice(r, s - r) for s in u.shape)
    band[inner] = out[inner]
    return u.like(band)


def _weight_grid(psi: Callable, grid: GridField) -> np.ndarray:
    pts = grid.points().reshape(-1, 4 * grid.n)
    return np.asarray(psi(pts), dtype=float).reshape(grid.shape)


def _pairing(density: np.ndarray, weight: np.ndarray, h: float) -> float:
    on = weight != 0.0
    if not np.all(np.isfinite(density[on])):
        raise ValueError("support of the weight reaches the undefined boundary band")
    return float(np.sum(density[on] * weight[on]) * h**4)


def ma_integral_mollified(u: GridField, psi: Callable, deltas: Sequence[float]) -> list[float]:
    """``int MA(u * rho_delta) psi`` over the lattice for each ``delta``."""
    w = _weight_grid(psi, u)
    out = []
    for delta in deltas:
        dens = ma_density(mollify(u, delta)).values
        out.append(_pairing(dens, w, u.h))
    return out


def ma_pairing(u: ScalarField, psi: Callable, points, volume: float) -> float:
    """Monte Carlo estimate ``volume * mean(MA(u) psi)`` over ``points``."""
    pts = u._points(points)
    dens = np.asarray(ma_density(u)(pts), dtype=float)
    return float(volume * np.mean(dens * np.asarray(psi(pts), dtype=float)))


def weak_convergence_slope(u: ScalarField, psi: Callable, ns, points, volume: float):
    """Errors ``|<MA(u + |q|^2/N), psi> - <MA(u), psi>|`` and their log-log slope in ``N``.

    All pairings share ``points`` so the sampling error largely cancels.
    """
    from .fields import norm_sq_field

    limit = ma_pairing(u, psi, points, volume)
    bump = norm_sq_field(u.n)
    errs = np.array([abs(ma_pairing(u + bump * (1.0 / N), psi, points, volume) - limit) for N in ns])
    slope = float(np.polyfit(np.log(np.asarray(ns, dtype=float)), np.log(errs), 1)[0])
    return errs, slope


def _k_fold_density(u: GridField, k: int, weights: WeightField) -> np.ndarray:
    if k == u.n and not weights.matrices:
        return ma_density(u).values
    return mixed_ma_density([u] * k, weights).values


def blocki_residual(
    f: GridField,
    g: GridField,
    weights: WeightField | None,
    psi: Callable,
    delta: float,
) -> float:
    """``|int [D(max) + D(min) - D(f) - D(g)] psi|`` after mollification.

    ``D`` is the mixed density with ``k = n - len(weights.matrices)`` copies
    of the Hessian.  The terms are grouped so that nested inputs (one field
    dominating the other) give exactly zero.
    """
    if f.shape != g.shape or f.h != g.h or not np.array_equal(f.origin, g.origin):
        raise ValueError("f and g must live on the same lattice")
    weights = weights if weights is not None else WeightField(f.n)
    k = f.n - len(weights.matrices)
    if k < 1:
        raise ValueError("too many matrix weights")
    hi = f.like(np.maximum(f.values, g.values))
    lo = f.like(np.minimum(f.values, g.values))
    w = _weight_grid(psi, f)

    def pair(a: GridField, b: GridField) -> float:
        if np.array_equal(a.values, b.values):
            return 0.0
        da = _k_fold_density(mollify(a, delta), k, weights)
        db = _k_fold_density(mollify(b, delta), k, weights)
        return _pairing(da - db, w, f.h)

    if np.array_equal(hi.values, f.values):
        total = pair(hi, f) + pair(lo, g)
    else:
        total = pair(hi, g) + pair(lo, f)
    return abs(total)


def _bump(s):
    return np.where(s < 1.0, (1.0 - np.minimum(s, 1.0)) ** 3, 0.0)


def _select(pts, coords):
    pts = np.asarray(pts, dtype=float)
    return pts if coords is None else pts[..., list(coords)]


def tensor_bump(center, radius: float, coords=None) -> Callable:
    """``prod_c b((y_c - center_c) / radius)`` with ``b(s) = (1 - s^2)^3`` on ``|s| < 1``.

    ``coords`` restricts the product to a subset of the real coordinates.
    """
    center = np.asarray(center, dtype=float)

    def psi(pts):
        s = ((_select(pts, coords) - center) / radius) ** 2
        return np.prod(_bump(s), axis=-1)

    return psi


def radial_bump(inner: float, outer: float, center=None, coords=None) -> Callable:
    """Radial bump supported on the shell ``inner < |y - center| < outer``.

    With ``inner = 0`` it is the ball bump ``(1 - |y|^2/outer^2)^3``.
    """

    def psi(pts):
        y = _select(pts, coords)
        c = 0.0 if center is None else np.asarray(center, dtype=float)
        r = np.linalg.norm(y - c, axis=-1)
        if inner <= 0.0:
            return _bump((r / outer) ** 2)
        mid = 0.5 * (inner + outer)
        half = 0.5 * (outer - inner)
        return _bump(((r - mid) / half) ** 2)

    return psi


def results_csv_rows(deltas, psi_id, integrals, residuals=None):
    """Rows ``(delta, psi_id, integral, residual)`` for the CSV writer."""
    residuals = residuals if residuals is not None else [float("nan")] * len(deltas)
    return [(d, psi_id, i, r) for d, i, r in zip(deltas, integrals, residuals)]
