"""Dirac operators, the quaternionic Hessian and its transformation law.

``dbar`` is ``d/d\\bar q_i F = F_t + i F_x + j F_y + k F_z`` (units on the
left) and ``d`` is ``d/dq_i F = F_t - F_x i - F_y j - F_z k`` (units on the
right).  The Hessian entry ``(i, j)`` is ``dbar_j`` applied to ``d_i f``.
"""

from __future__ import annotations

import numpy as np

from . import jet as _jet
from .fields import (
    ADField,
    GridField,
    PolyField,
    ScalarField,
    quaternionic_hessian_from_real,
)
from .poly import Polynomial
from .quaternion import UNITS, qconj_transpose, qmatmul, qmul, real_matrix, right_matrix

__all__ = [
    "dbar",
    "d",
    "hessian",
    "HessianField",
    "DerivativeField",
    "compose_linear",
    "check_transformation",
    "check_transformation_unit",
    "commutator_deviation",
]

_SIGNS = np.array([1.0, -1.0, -1.0, -1.0])


class DerivativeField(ScalarField):
    """First Dirac derivative of an :class:`ADField`; evaluation only."""

    def __init__(self, base: ADField, var: int, left: bool):
        self.base = base
        self.var = var
        self.left = left
        self.n = base.n
        self.quaternionic = True

    def __call__(self, points):
        g = self.base.gradient(points)
        cols = slice(4 * self.var, 4 * self.var + 4)
        if not self.base.quaternionic:
            g = g[:, None, :] * np.array([1.0, 0, 0, 0])[None, :, None]
        part = g[..., cols]  # (P, 4 components, 4 partials)
        return _combine(np.moveaxis(part, -1, 1), self.left)


def _combine(partials, left: bool):
    """``sum_a e_a * F_a`` (left) or ``sum_a F_a * conj(e_a)`` (right).

    ``partials`` has shape ``(..., 4 partials, 4 components)``.
    """
    out = np.zeros(partials.shape[:-2] + (4,))
    for a in range(4):
        if left:
            out = out + qmul(UNITS[a], partials[..., a, :])
        else:
            out = out + qmul(partials[..., a, :], UNITS[a] * _SIGNS)
    return out


def _poly_dirac(F: PolyField, i: int, left: bool) -> PolyField:
    out = None
    for a in range(4):
        part = F.poly.diff(4 * i + a)
        unit = UNITS[a] if left else UNITS[a] * _SIGNS
        if left:
            term = part.map_coeffs(lambda c, u=unit: qmul(u, c))
        else:
            term = part.map_coeffs(lambda c, u=unit: qmul(c, u))
        out = term if out is None else out + term
    return PolyField(out, F.n)


def _grid_dirac(F: GridField, i: int, left: bool) -> GridField:
    if F.n != 1:
        raise ValueError("grid Dirac operators are implemented for n = 1 only")
    if i != 0:
        raise IndexError("variable index out of range")
    vals = F.values if F.quaternionic else F.values[..., None] * np.array([1.0, 0, 0, 0])
    partials = np.stack([F.like(vals[..., c]).partial(a) for a in range(4) for c in range(4)], axis=-1)
    partials = partials.reshape(vals.shape[:4] + (4, 4))
    return F.like(_combine(partials, left))


def _dirac(F: ScalarField, i: int, left: bool) -> ScalarField:
    if not 0 <= i < F.n:
        raise IndexError("variable index out of range")
    if isinstance(F, PolyField):
        return _poly_dirac(F, i, left)
    if isinstance(F, GridField):
        return _grid_dirac(F, i, left)
    if isinstance(F, ADField):
        return DerivativeField(F, i, left)
    raise TypeError(f"unsupported field type {type(F).__name__}")


def dbar(F: ScalarField, i: int = 0) -> ScalarField:
    """``d/d\\bar q_i`` with the imaginary units multiplied on the left."""
    return _dirac(F, i, left=True)


def d(F: ScalarField, i: int = 0) -> ScalarField:
    """``d/dq_i`` with conjugate units multiplied on the right."""
    return _dirac(F, i, left=False)


class HessianField:
    """The map ``q -> (d^2 f / dq_i d\\bar q_j)(q)``.

    Point backends are evaluated with ``H(points)``; for grid fields the
    values at all nodes are in ``H.grid`` (NaN on the outer band).
    """

    def __init__(self, n: int, func=None, grid=None, source=None):
        self.n = n
        self._func = func
        self.grid = grid
        self.source = source

    def __call__(self, points) -> np.ndarray:
        if self._func is None:
            raise ValueError("grid Hessians are read from .grid")
        return self._func(points)


def _check_diag(values, n):
    diag = values[..., np.arange(n), np.arange(n), :]
    scale = max(1.0, float(np.nanmax(np.abs(values)))) if values.size else 1.0
    resid = float(np.nanmax(np.abs(diag[..., 1:]))) if diag.size else 0.0
    if resid > 1e-9 * scale:
        raise ArithmeticError(f"Hessian diagonal has imaginary residue {resid:.3e}")


def _poly_hessian_entries(f: PolyField, order: str = "dbar_d"):
    entries = []
    for i in range(f.n):
        row = []
        for j in range(f.n):
            if order == "dbar_d":
                row.append(dbar(d(f, i), j).poly)
            else:
                row.append(d(dbar(f, j), i).poly)
        entries.append(row)
    return entries


def hessian(f: ScalarField, order: str = "dbar_d") -> HessianField:
    """Quaternionic Hessian of a real field.

    Parameters
    ----------
    f : ScalarField
        Real-valued.
    order : {"dbar_d", "d_dbar"}
        Composition order for the polynomial backend; both must agree.
    """
    if f.quaternionic:
        raise ValueError("the Hessian is defined for real-valued fields")
    n = f.n
    if isinstance(f, GridField):
        vals = f.quaternionic_hessian_grid()
        _check_diag(vals, n)
        return HessianField(n, grid=vals, source=f)
    if isinstance(f, PolyField):
        entries = _poly_hessian_entries(f, order)

        def func(points):
            pts = f._points(points)
            out = np.empty((len(pts), n, n, 4))
            for i in range(n):
                for j in range(n):
                    out[:, i, j] = entries[i][j](pts)
            _check_diag(out, n)
            return out

        return HessianField(n, func=func, source=f)

    def func(points):
        out = quaternionic_hessian_from_real(f.real_hessian(points), n)
        _check_diag(out, n)
        return out

    return HessianField(n, func=func, source=f)


def compose_linear(f: ScalarField, matrix) -> ScalarField:
    """``q -> f(M q)`` for a real ``4n x 4n`` matrix ``M``."""
    if isinstance(f, PolyField):
        return f.compose_linear(matrix)
    if isinstance(f, ADField):
        return f.compose_linear(matrix)
    raise TypeError("composition needs a polynomial or AD field")


def _transformation_deviation(f, real_map, a, points):
    pts = f._points(points)
    # the law holds for the (d^2 f / d\bar q_i dq_j) ordering, the transpose
    # of the Hessian returned by hessian()
    lhs = np.swapaxes(hessian(compose_linear(f, real_map))(pts), -2, -3)
    moved = pts @ real_map.T
    inner = np.swapaxes(hessian(f)(moved), -2, -3)
    rhs = qmatmul(qmatmul(qconj_transpose(a)[None], inner), np.asarray(a, float)[None])
    return float(np.max(np.abs(lhs - rhs)))


def check_transformation(f: ScalarField, a, points) -> float:
    """Max deviation of ``Hess(f o A)(q)`` from ``A* Hess(f)(Aq) A`` over ``points``.

    ``A`` is an ``n x n`` quaternionic matrix acting on ``H^n`` as a right
    vector space, ``(Aq)_i = sum_j a_ij q_j``.
    """
    a = np.asarray(a, dtype=float)
    return _transformation_deviation(f, real_matrix(a), a, points)


def check_transformation_unit(f: ScalarField, a, unit, points) -> float:
    """Same deviation for ``q -> A(q u)`` with a unit quaternion ``u``."""
    a = np.asarray(a, dtype=float)
    unit = np.asarray(unit, dtype=float)
    n = a.shape[0]
    r = np.kron(np.eye(n), right_matrix(unit))
    return _transformation_deviation(f, real_matrix(a) @ r, a, points)


def commutator_deviation(F: PolyField, i: int, j: int, points) -> float:
    """``sup |d_i(dbar_j F) - dbar_j(d_i F)|`` over ``points``."""
    lhs = d(dbar(F, j), i)
    rhs = dbar(d(F, i), j)
    pts = F._points(points)
    vals = lhs.poly(pts) - rhs.poly(pts)
    return float(np.max(np.abs(vals))) if vals.size else 0.0
