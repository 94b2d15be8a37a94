"""Scalar fields on open subsets of ``H^n``.

Three backends share the :class:`ScalarField` interface:

* :class:`PolyField` -- polynomial in the ``4n`` real coordinates with
  quaternion coefficients; derivatives are exact.
* :class:`ADField` -- any callable built from :mod:`quatpsh.jet`-aware
  operations; second derivatives by forward-mode differentiation.
* :class:`GridField` -- values on a uniform 4D lattice (``n = 1``, or four
  chosen real coordinates of ``H^n``), centered differences.

Real coordinates of a point of ``H^n`` are laid out variable by variable as
``(t_1, x_1, y_1, z_1, t_2, ...)``.
"""

from __future__ import annotations

import json
from typing import Callable, Sequence

import numpy as np

from . import jet as _jet
from .poly import Polynomial
from .quaternion import qconj, qmul, UNITS

__all__ = [
    "ScalarField",
    "PolyField",
    "ADField",
    "GridField",
    "SampledField",
    "quaternionic_hessian_from_real",
    "norm_sq_field",
]

# _HESS_TABLE[a, b] = e_b * conj(e_a)
_HESS_TABLE = np.array([[qmul(UNITS[b], qconj(UNITS[a])) for b in range(4)] for a in range(4)])


def quaternionic_hessian_from_real(real_hess, n: int) -> np.ndarray:
    """Contract a real ``4n x 4n`` Hessian into ``(d^2 f / dq_i d\\bar q_j)``.

    For a real function ``f`` the ``(i, j)`` entry is
    ``sum_{a,b} f_{(i,a),(j,b)} e_b conj(e_a)``, which is what composing the
    two Dirac operators produces.  Output shape ``(..., n, n, 4)``.
    """
    h = np.asarray(real_hess, dtype=float)
    h = h.reshape(h.shape[:-2] + (n, 4, n, 4))
    return np.einsum("...iajb,abc->...ijc", h, _HESS_TABLE)


class ScalarField:
    """Base class.  ``quaternionic`` fields return ``(P, 4)`` values, real ones ``(P,)``."""

    n: int
    quaternionic: bool = False

    @property
    def dim(self) -> int:
        return 4 * self.n

    def __call__(self, points) -> np.ndarray:
        raise NotImplementedError

    def real_hessian(self, points) -> np.ndarray:
        """Real ``4n x 4n`` Hessian at each point (real-valued fields only)."""
        raise NotImplementedError

    def jet(self, coords):
        """Evaluate on a list of ``4n`` jets (or arrays)."""
        raise NotImplementedError

    def _points(self, points):
        pts = np.asarray(points, dtype=float)
        if pts.ndim == 1:
            pts = pts[None, :]
        if pts.shape[-1] != self.dim:
            raise ValueError(f"points must have {self.dim} real coordinates")
        return pts


class PolyField(ScalarField):
    """Polynomial field with quaternion coefficients.

    Parameters
    ----------
    poly : Polynomial
        ``nvars = 4n``; scalar real coefficients are promoted to quaternions.
    n : int
    """

    def __init__(self, poly: Polynomial, n: int):
        if poly.nvars != 4 * n:
            raise ValueError(f"polynomial has {poly.nvars} variables, expected {4 * n}")
        if poly.coeff_shape == ():
            poly = poly.map_coeffs(lambda c: np.array([float(np.real(c)), 0, 0, 0]), (4,), float)
        elif poly.coeff_shape != (4,):
            raise ValueError("coefficients must be real scalars or quaternions")
        self.poly = poly
        self.n = n
        self.quaternionic = any(np.any(c[1:] != 0) for c in poly.terms.values())
        self._hess_cache = None

    @classmethod
    def from_terms(cls, n: int, terms: Sequence[dict]) -> "PolyField":
        t = {}
        for term in terms:
            e = tuple(term["exponent"])
            c = np.asarray(term["coef"], dtype=float)
            if c.ndim == 0:
                c = np.array([float(c), 0, 0, 0])
            t[e] = t.get(e, np.zeros(4)) + c
        return cls(Polynomial(4 * n, t, (4,)), n)

    @classmethod
    def from_json(cls, text: str) -> "PolyField":
        obj = json.loads(text)
        return cls.from_terms(int(obj["n"]), obj["terms"])

    def to_json(self) -> str:
        return json.dumps({"n": self.n, "terms": self.poly.to_terms()})

    @classmethod
    def random(cls, n, degree, rng, *, real=True, nterms=None, integer=3) -> "PolyField":
        """Random polynomial with small integer coefficients."""
        dim = 4 * n
        nterms = nterms or 3 * dim
        terms = {}
        for _ in range(nterms):
            deg = rng.integers(0, degree + 1)
            e = np.zeros(dim, dtype=int)
            for v in rng.integers(0, dim, size=deg):
                e[v] += 1
            c = rng.integers(-integer, integer + 1, size=4).astype(float)
            if real:
                c[1:] = 0
            terms[tuple(e)] = terms.get(tuple(e), np.zeros(4)) + c
        return cls(Polynomial(dim, terms, (4,)), n)

    def real_part(self) -> Polynomial:
        return self.poly.component(0)

    def __call__(self, points):
        pts = self._points(points)
        vals = self.poly(pts)
        return vals if self.quaternionic else vals[..., 0]

    def _second_partials(self):
        if self._hess_cache is None:
            p = self.real_part()
            first = [p.diff(a) for a in range(self.dim)]
            self._hess_cache = [[first[a].diff(b) for b in range(self.dim)] for a in range(self.dim)]
        return self._hess_cache

    def real_hessian(self, points):
        if self.quaternionic:
            raise ValueError("real Hessian requested for an H-valued field")
        pts = self._points(points)
        sec = self._second_partials()
        out = np.empty((len(pts), self.dim, self.dim))
        for a in range(self.dim):
            for b in range(a, self.dim):
                out[:, a, b] = out[:, b, a] = sec[a][b](pts)
        return out

    def jet(self, coords):
        comps = [self.poly.component(c).evaluate_generic(coords) for c in range(4)]
        return comps if self.quaternionic else comps[0]

    def compose_linear(self, matrix) -> "PolyField":
        return PolyField(self.poly.compose_linear(matrix), self.n)

    def __add__(self, other):
        if isinstance(other, PolyField):
            return PolyField(self.poly + other.poly, self.n)
        return NotImplemented

    def __mul__(self, scalar):
        return PolyField(self.poly * float(scalar), self.n)

    __rmul__ = __mul__

    def __neg__(self):
        return PolyField(-self.poly, self.n)

    def __repr__(self):
        kind = "H" if self.quaternionic else "R"
        return f"PolyField(n={self.n}, {kind}-valued, degree={self.poly.degree})"


def norm_sq_field(n: int, weights=None) -> PolyField:
    """``sum_i w_i |q_i|^2`` as a polynomial field."""
    w = np.ones(n) if weights is None else np.asarray(weights, dtype=float)
    terms = {}
    for i in range(n):
        for a in range(4):
            e = [0] * (4 * n)
            e[4 * i + a] = 2
            terms[tuple(e)] = np.array([w[i], 0, 0, 0])
    return PolyField(Polynomial(4 * n, terms, (4,)), n)


class ADField(ScalarField):
    """Field given by a callable on the list of ``4n`` real coordinates.

    The callable must only use arithmetic and the functions of
    :mod:`quatpsh.jet` so that it accepts both arrays and jets.  H-valued
    callables return a sequence of four components.
    """

    def __init__(self, func: Callable, n: int, quaternionic: bool = False):
        self.func = func
        self.n = n
        self.quaternionic = quaternionic

    def __call__(self, points):
        pts = self._points(points)
        out = self.func([pts[:, a] for a in range(self.dim)])
        if self.quaternionic:
            return np.stack([np.broadcast_to(c, pts.shape[:1]) for c in out], axis=-1)
        return np.broadcast_to(np.asarray(out, dtype=float), pts.shape[:1]).copy()

    def jet(self, coords):
        return self.func(coords)

    def _jet_values(self, points):
        pts = self._points(points)
        out = self.func(_jet.seed(pts))
        comps = list(out) if self.quaternionic else [out]
        return [c if isinstance(c, _jet.Jet) else _jet.Jet(
            np.broadcast_to(np.asarray(c, float), pts.shape[:1]),
            np.zeros(pts.shape), np.zeros(pts.shape + (pts.shape[1],))) for c in comps]

    def gradient(self, points) -> np.ndarray:
        """Real gradient, shape ``(P, 4n)`` (or ``(P, 4, 4n)`` if H-valued)."""
        g = [c.grad for c in self._jet_values(points)]
        return np.stack(g, axis=1) if self.quaternionic else g[0]

    def real_hessian(self, points):
        if self.quaternionic:
            raise ValueError("real Hessian requested for an H-valued field")
        return self._jet_values(points)[0].hess

    def compose_linear(self, matrix) -> "ADField":
        f = self.func
        return ADField(lambda x: f(_jet.linear_map(matrix, x)), self.n, self.quaternionic)

    @classmethod
    def from_field(cls, field: ScalarField) -> "ADField":
        return cls(field.jet, field.n, field.quaternionic)


class SampledField(ScalarField):
    """Evaluation-only real field given by a vectorized callable on points."""

    def __init__(self, func: Callable, n: int):
        self.func = func
        self.n = n

    def __call__(self, points):
        return np.asarray(self.func(self._points(points)), dtype=float)


class GridField(ScalarField):
    """Values on a uniform 4D lattice.

    Parameters
    ----------
    values : ndarray, shape (N0, N1, N2, N3) or (N0, N1, N2, N3, 4)
    origin : array_like, shape (4,)
        Coordinates of node ``(0, 0, 0, 0)``.
    h : float
        Lattice spacing.
    n : int
        Number of quaternionic variables of the ambient space.
    axes : sequence of 4 ints, optional
        Real coordinates of ``H^n`` spanned by the lattice; the field is
        constant in all others.  Defaults to ``(0, 1, 2, 3)``.
    """

    def __init__(self, values, origin, h: float, n: int = 1, axes=None):
        values = np.asarray(values, dtype=float)
        self.quaternionic = values.ndim == 5
        if values.ndim not in (4, 5) or (self.quaternionic and values.shape[-1] != 4):
            raise ValueError("grid values must be 4D (or 4D x 4 for H-valued)")
        self.values = values
        self.origin = np.asarray(origin, dtype=float)
        self.h = float(h)
        self.n = n
        self.axes = tuple(range(4)) if axes is None else tuple(int(a) for a in axes)
        if len(self.axes) != 4 or max(self.axes) >= 4 * n:
            raise ValueError("axes must name four real coordinates of H^n")
        if n == 1 and self.axes != (0, 1, 2, 3):
            raise ValueError("for n = 1 the lattice spans all of H")

    @property
    def shape(self):
        return self.values.shape[:4]

    @classmethod
    def from_function(cls, func, origin, h, shape, n=1, axes=None) -> "GridField":
        """Sample ``func`` (taking points of shape ``(P, 4n)``) on the lattice."""
        g = cls(np.zeros(tuple(shape)), origin, h, n, axes)
        pts = g.points()
        vals = np.asarray(func(pts.reshape(-1, 4 * n)))
        if vals.ndim == 2:
            vals = vals.reshape(tuple(shape) + (4,))
        else:
            vals = vals.reshape(tuple(shape))
        return cls(vals, origin, h, n, axes)

    @classmethod
    def centered(cls, func, half_width: float, cells: int, n=1, axes=None) -> "GridField":
        """Lattice on ``[-half_width, half_width]^4`` with ``cells`` intervals per axis."""
        h = 2.0 * half_width / cells
        return cls.from_function(func, [-half_width] * 4, h, (cells + 1,) * 4, n, axes)

    def like(self, values) -> "GridField":
        return GridField(values, self.origin, self.h, self.n, self.axes)

    def grid_coords(self) -> np.ndarray:
        """Lattice coordinates, shape ``(N0, N1, N2, N3, 4)``."""
        axes = [self.origin[a] + self.h * np.arange(s) for a, s in enumerate(self.shape)]
        return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)

    def points(self) -> np.ndarray:
        """Full ``4n``-coordinate points of the nodes (zero off the lattice axes)."""
        gc = self.grid_coords()
        pts = np.zeros(gc.shape[:4] + (4 * self.n,))
        pts[..., list(self.axes)] = gc
        return pts

    def __call__(self, points=None):
        if points is not None:
            raise ValueError("grid fields are evaluated at their nodes only")
        return self.values

    def valid_mask(self) -> np.ndarray:
        v = self.values if not self.quaternionic else self.values[..., 0]
        return np.isfinite(v)

    def _interior(self, arr):
        out = np.full(arr.shape, np.nan)
        out[1:-1, 1:-1, 1:-1, 1:-1] = arr[1:-1, 1:-1, 1:-1, 1:-1]
        return out

    @staticmethod
    def _shift(u, axis, step):
        sl = [slice(1, -1)] * 4
        sl[axis] = slice(1 + step, u.shape[axis] - 1 + step)
        return u[tuple(sl) + (Ellipsis,)]

    @staticmethod
    def _shift2(u, a, sa, b, sb):
        sl = [slice(1, -1)] * 4
        sl[a] = slice(1 + sa, u.shape[a] - 1 + sa)
        sl[b] = slice(1 + sb, u.shape[b] - 1 + sb)
        return u[tuple(sl) + (Ellipsis,)]

    def partial(self, axis: int) -> np.ndarray:
        """Centered first difference along a lattice axis; NaN on the outer band."""
        u = self.values
        out = np.full(u.shape, np.nan)
        out[1:-1, 1:-1, 1:-1, 1:-1] = (self._shift(u, axis, 1) - self._shift(u, axis, -1)) / (
            2.0 * self.h
        )
        return out

    def real_hessian_grid(self) -> np.ndarray:
        """Second differences in the lattice axes, shape ``(N0..N3, 4, 4)``."""
        if self.quaternionic:
            raise ValueError("real Hessian requested for an H-valued field")
        u = self.values
        h2 = self.h**2
        c = u[1:-1, 1:-1, 1:-1, 1:-1]
        inner = np.empty(c.shape + (4, 4))
        for a in range(4):
            inner[..., a, a] = (self._shift(u, a, 1) - 2.0 * c + self._shift(u, a, -1)) / h2
            for b in range(a + 1, 4):
                m = (
                    self._shift2(u, a, 1, b, 1)
                    - self._shift2(u, a, 1, b, -1)
                    - self._shift2(u, a, -1, b, 1)
                    + self._shift2(u, a, -1, b, -1)
                ) / (4.0 * h2)
                inner[..., a, b] = inner[..., b, a] = m
        out = np.full(u.shape + (4, 4), np.nan)
        out[1:-1, 1:-1, 1:-1, 1:-1] = inner
        return out

    def laplacian(self) -> np.ndarray:
        u = self.values
        c = u[1:-1, 1:-1, 1:-1, 1:-1]
        lap = sum(self._shift(u, a, 1) - 2.0 * c + self._shift(u, a, -1) for a in range(4))
        out = np.full(u.shape, np.nan)
        out[1:-1, 1:-1, 1:-1, 1:-1] = lap / self.h**2
        return out

    def embed_hessian(self, h4) -> np.ndarray:
        """Place a lattice-axes Hessian into the ambient ``4n x 4n`` layout."""
        full = np.zeros(h4.shape[:-2] + (4 * self.n, 4 * self.n))
        idx = np.array(self.axes)
        full[..., idx[:, None], idx[None, :]] = h4
        return full

    def quaternionic_hessian_grid(self) -> np.ndarray:
        return quaternionic_hessian_from_real(self.embed_hessian(self.real_hessian_grid()), self.n)

    def integrate(self, density) -> float:
        """Riemann sum of ``density`` (NaN treated as an error) over the nodes."""
        d = np.asarray(density, dtype=float)
        if np.any(~np.isfinite(d)):
            raise ValueError("density is undefined on part of the lattice")
        return float(d.sum() * self.h**4)

    def __repr__(self):
        return f"GridField(shape={self.shape}, h={self.h}, n={self.n}, axes={self.axes})"
