"""Translation-invariant valuations built from mixed Monge-Ampère densities.

For a convex body ``K`` in ``H^n* = R^{4n}`` the valuation is

    phi(K) = int det(Hess(h_K * rho)[k], V_1, ..., V_{n-k}) psi0 dvol

with ``rho`` the bump kernel of radius ``delta``.  The mollified Hessian is
computed by moving both derivatives onto the kernel,

    Hess(h * rho)(y) = 1/2 int [h(y - z) + h(y + z) - 2 h(y)] Hess rho(z) dz,

and the inner integral uses a fixed quasi-random rule on the kernel ball, so
the estimate is linear in ``h``: translations contribute nothing and
scalings act exactly.  The outer integral is randomized QMC over the shell
carrying ``psi0``, replicated to estimate a standard error.

A deterministic grid backend evaluates the same pairing on a four-dimensional
coordinate lattice (all of ``H`` for ``n = 1``, a slice of ``H^n`` otherwise)
with lattice mollification and finite differences.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.special import gamma

from .convex import ConvexBody, Hull, Intersection
from .fields import GridField, quaternionic_hessian_from_real
from .hyperherm import mixed_discriminant, moore_det
from .psh import WeightField, _k_fold_density, _pairing, _weight_grid, blocki_residual, mollify, radial_bump
from .qmc import ball_points, replicate_seeds, shell_points

__all__ = [
    "ValuationSpec",
    "GridSpec",
    "ValuationResult",
    "kernel_hessian",
    "mollified_hessian",
    "valuation_integrand",
    "valuation",
    "valuation_identity_residual",
]

DEFAULT_SAMPLES = {1: 2**16, 2: 2**18}


def _unit_ball_volume(d: int) -> float:
    return float(np.pi ** (d / 2) / gamma(d / 2 + 1))


def kernel_hessian(z, delta: float) -> np.ndarray:
    """Real Hessian of the normalized kernel ``c (1 - |z|^2/delta^2)^3`` at ``z`` (shape ``(m, d)``)."""
    z = np.asarray(z, dtype=float)
    d = z.shape[-1]
    c = gamma(d / 2 + 4) / (6.0 * np.pi ** (d / 2) * delta**d)
    s = np.sum(z * z, axis=-1) / delta**2
    inside = s < 1.0
    one = np.where(inside, 1.0 - s, 0.0)
    outer = z[:, :, None] * z[:, None, :]
    eye = np.eye(d)
    return c * (
        24.0 * one[:, None, None] * outer / delta**4 - 6.0 * (one**2)[:, None, None] * eye / delta**2
    )


def mollified_hessian(body: ConvexBody, y, delta: float, inner, chunk: int = 4096) -> np.ndarray:
    """Real Hessian of ``h_K * rho_delta`` at points ``y`` using inner nodes ``inner`` (uniform in the ball)."""
    y = np.asarray(y, dtype=float)
    inner = np.asarray(inner, dtype=float)
    d = y.shape[-1]
    weights = kernel_hessian(inner, delta).reshape(len(inner), d * d)
    vol = _unit_ball_volume(d) * delta**d
    scale = 0.5 * vol / len(inner)
    out = np.empty((len(y), d * d))
    for s in range(0, len(y), chunk):
        sd = body.second_difference(y[s : s + chunk], inner)
        out[s : s + chunk] = scale * (sd @ weights)
    return out.reshape(len(y), d, d)


@dataclass(frozen=True)
class GridSpec:
    """Lattice ``[-half_width, half_width]^4`` along four real coordinates."""

    axes: tuple = (0, 1, 2, 3)
    half_width: float = 0.4
    cells: int = 32

    def sample(self, body: ConvexBody, n: int) -> GridField:
        return GridField.centered(body.support, self.half_width, self.cells, n, self.axes)


@dataclass
class ValuationSpec:
    """Parameters of the valuation and of its quadrature.

    ``psi0`` is supported in the shell ``support_inner <= |y| <= support_outer``;
    ``exclusion_radius`` is the ball around the origin it must avoid.
    ``weights`` are ``n - k`` callables returning hyperhermitian matrices.
    """

    n: int
    k: int
    weights: list = field(default_factory=list)
    psi0: Callable | None = None
    support_inner: float = 0.5
    support_outer: float = 2.0
    exclusion_radius: float = 0.25
    delta: float = 0.2
    n_samples: int | None = None
    inner_nodes: int = 64
    replicates: int = 8
    seed: int = 0
    backend: str = "qmc"
    grid: GridSpec | None = None

    def __post_init__(self):
        if self.backend not in ("qmc", "grid"):
            raise ValueError(f"unknown backend {self.backend!r}")
        if self.backend == "grid" and self.grid is None:
            self.grid = GridSpec()
        if not 1 <= self.k <= self.n:
            raise ValueError("k must lie in 1..n")
        if self.k + len(self.weights) != self.n:
            raise ValueError(f"k = {self.k} with {len(self.weights)} weights does not match n = {self.n}")
        if self.support_inner <= self.exclusion_radius:
            raise ValueError("support of psi0 touches the excluded ball around the origin")
        if self.support_outer <= self.support_inner:
            raise ValueError("empty support shell")
        if self.delta <= 0:
            raise ValueError("delta must be positive")
        if self.psi0 is None:
            self.psi0 = radial_bump(self.support_inner, self.support_outer)
        if self.n_samples is None:
            self.n_samples = DEFAULT_SAMPLES.get(self.n, 2**18)

    @property
    def dim(self) -> int:
        return 4 * self.n

    @property
    def shell_volume(self) -> float:
        d = self.dim
        return _unit_ball_volume(d) * (self.support_outer**d - self.support_inner**d)

    def nodes(self, replicate: int):
        """Outer and inner quadrature nodes of one replicate."""
        s_out, s_in = replicate_seeds(self.seed, 2 * self.replicates)[2 * replicate : 2 * replicate + 2]
        outer = shell_points(self.n_samples, self.dim, self.support_inner, self.support_outer, s_out)
        inner = ball_points(self.inner_nodes, self.dim, self.delta, s_in)
        return outer, inner


@dataclass
class ValuationResult:
    value: float
    stderr: float
    replicate_values: np.ndarray
    n_samples: int
    delta: float


def valuation_integrand(body: ConvexBody, spec: ValuationSpec, replicate: int = 0):
    """Integrand values ``D(y) psi0(y)`` and the mixed densities at the nodes of one replicate.

    Returns ``(points, density, integrand)``.
    """
    if body.dim != spec.dim:
        raise ValueError(f"body lives in R^{body.dim}, expected R^{spec.dim}")
    pts, inner = spec.nodes(replicate)
    real_h = mollified_hessian(body, pts, spec.delta, inner)
    qh = quaternionic_hessian_from_real(real_h, spec.n)
    # symmetrize rounding in the quaternionic Hessian
    qh = 0.5 * (qh + _qconj_t(qh))
    if spec.weights:
        vs = [np.asarray(v(pts), dtype=float) for v in spec.weights]
        dens = mixed_discriminant([qh] * spec.k + vs)
    else:
        dens = moore_det(qh, check=False)
    w = np.asarray(spec.psi0(pts), dtype=float)
    return pts, dens, dens * w


def _qconj_t(a):
    b = np.swapaxes(a, -2, -3).copy()
    b[..., 1:] *= -1.0
    return b


def _aggregate(values, spec) -> ValuationResult:
    vals = np.asarray(values, dtype=float)
    se = float(vals.std(ddof=1) / np.sqrt(len(vals))) if len(vals) > 1 else float("nan")
    return ValuationResult(float(vals.mean()), se, vals, int(spec.n_samples), float(spec.delta))


def _grid_value(body: ConvexBody, spec: ValuationSpec) -> float:
    u = spec.grid.sample(body, spec.n)
    dens = _k_fold_density(mollify(u, spec.delta), spec.k, WeightField(spec.n, list(spec.weights)))
    return _pairing(dens, _weight_grid(spec.psi0, u), u.h)


def _grid_result(value: float, spec: ValuationSpec) -> ValuationResult:
    return ValuationResult(value, 0.0, np.array([value]), (spec.grid.cells + 1) ** 4, float(spec.delta))


def valuation(body: ConvexBody, spec: ValuationSpec) -> ValuationResult:
    """Value of the valuation on ``body`` with its standard error (zero for the grid backend)."""
    if body.dim != spec.dim:
        raise ValueError(f"body lives in R^{body.dim}, expected R^{spec.dim}")
    if spec.backend == "grid":
        return _grid_result(_grid_value(body, spec), spec)
    vals = []
    for r in range(spec.replicates):
        _, _, integrand = valuation_integrand(body, spec, r)
        vals.append(spec.shell_volume * float(np.mean(integrand)))
    return _aggregate(vals, spec)


def valuation_identity_residual(k1: ConvexBody, k2: ConvexBody, spec: ValuationSpec) -> ValuationResult:
    """``|phi(hull) + phi(min-body) - phi(K1) - phi(K2)|`` on common quadrature nodes.

    Only meaningful when ``K1`` union ``K2`` is convex.  Per sample the
    terms are grouped as ``(D(max) - D(K2)) + (D(min) - D(K1))`` so nested
    pairs give exactly zero.
    """
    if spec.backend == "grid":
        f, g = spec.grid.sample(k1, spec.n), spec.grid.sample(k2, spec.n)
        res = blocki_residual(f, g, WeightField(spec.n, list(spec.weights)), spec.psi0, spec.delta)
        return _grid_result(res, spec)
    hi, lo = Hull(k1, k2), Intersection(k1, k2)
    vals = []
    for r in range(spec.replicates):
        i_hi = valuation_integrand(hi, spec, r)[2]
        i_lo = valuation_integrand(lo, spec, r)[2]
        i_1 = valuation_integrand(k1, spec, r)[2]
        i_2 = valuation_integrand(k2, spec, r)[2]
        vals.append(spec.shell_volume * float(np.mean((i_hi - i_2) + (i_lo - i_1))))
    res = _aggregate(vals, spec)
    return ValuationResult(abs(res.value), res.stderr, res.replicate_values, res.n_samples, res.delta)
