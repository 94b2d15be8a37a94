"""Second-order forward-mode differentiation.

A :class:`Jet` carries value, gradient and Hessian of a scalar quantity with
respect to ``d`` seed directions, vectorized over a leading batch axis.
Arithmetic propagates all three exactly (up to rounding), so the Hessian of
any composition of supported operations comes out in one forward pass.
"""

from __future__ import annotations

import numpy as np

__all__ = ["Jet", "seed", "exp", "log", "sin", "cos", "sqrt", "tanh", "linear_map"]


class Jet:
    __slots__ = ("val", "grad", "hess")
    __array_priority__ = 100

    def __init__(self, val, grad, hess):
        self.val = val  # (P,)
        self.grad = grad  # (P, d)
        self.hess = hess  # (P, d, d)

    @property
    def dim(self):
        return self.grad.shape[-1]

    def _lift(self, other):
        if isinstance(other, Jet):
            return other
        c = np.asarray(other, dtype=float)
        c = np.broadcast_to(c, self.val.shape)
        return Jet(c, np.zeros_like(self.grad), np.zeros_like(self.hess))

    def __add__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.val + other, self.grad, self.hess)
        return Jet(self.val + other.val, self.grad + other.grad, self.hess + other.hess)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.val, -self.grad, -self.hess)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Jet):
            c = np.asarray(other, dtype=float)
            return Jet(self.val * c, self.grad * c[..., None], self.hess * c[..., None, None])
        u, v = self, other
        outer = u.grad[..., :, None] * v.grad[..., None, :]
        return Jet(
            u.val * v.val,
            u.grad * v.val[..., None] + v.grad * u.val[..., None],
            u.hess * v.val[..., None, None]
            + v.hess * u.val[..., None, None]
            + outer
            + np.swapaxes(outer, -1, -2),
        )

    __rmul__ = __mul__

    def chain(self, f0, f1, f2):
        """Apply a scalar function given its value and first two derivatives at ``val``."""
        g = self.grad
        return Jet(
            f0,
            g * f1[..., None],
            self.hess * f1[..., None, None] + f2[..., None, None] * g[..., :, None] * g[..., None, :],
        )

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            return self * (1.0 / np.asarray(other, dtype=float))
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def reciprocal(self):
        v = self.val
        return self.chain(1.0 / v, -1.0 / v**2, 2.0 / v**3)

    def __pow__(self, p):
        p = float(p)
        v = self.val
        if p == int(p) and p >= 0:
            k = int(p)
            if k == 0:
                return self._lift(1.0)
            f0 = v**k
            f1 = k * v ** (k - 1)
            f2 = k * (k - 1) * v ** (k - 2) if k >= 2 else np.zeros_like(v)
            return self.chain(f0, f1, f2)
        return self.chain(v**p, p * v ** (p - 1), p * (p - 1) * v ** (p - 2))


def seed(points) -> list[Jet]:
    """One jet per coordinate of ``points`` (shape ``(P, d)``), with unit gradients."""
    pts = np.asarray(points, dtype=float)
    P, d = pts.shape
    eye = np.eye(d)
    zero_h = np.zeros((P, d, d))
    return [Jet(pts[:, a].copy(), np.broadcast_to(eye[a], (P, d)).copy(), zero_h) for a in range(d)]


def linear_map(matrix, coords, offset=None):
    """``matrix @ coords (+ offset)`` for a list of jets or arrays."""
    matrix = np.asarray(matrix, dtype=float)
    out = []
    for r in range(matrix.shape[0]):
        acc = 0.0 if offset is None else float(offset[r])
        for c in range(matrix.shape[1]):
            if matrix[r, c] != 0.0:
                acc = coords[c] * matrix[r, c] + acc
        out.append(acc)
    return out


def _unary(x, f0, f1, f2):
    if isinstance(x, Jet):
        v = x.val
        return x.chain(f0(v), f1(v), f2(v))
    return f0(np.asarray(x, dtype=float))


def exp(x):
    return _unary(x, np.exp, np.exp, np.exp)


def log(x):
    return _unary(x, np.log, lambda v: 1.0 / v, lambda v: -1.0 / v**2)


def sin(x):
    return _unary(x, np.sin, np.cos, lambda v: -np.sin(v))


def cos(x):
    return _unary(x, np.cos, lambda v: -np.sin(v), lambda v: -np.cos(v))


def sqrt(x):
    return _unary(x, np.sqrt, lambda v: 0.5 / np.sqrt(v), lambda v: -0.25 * v**-1.5)


def tanh(x):
    return _unary(
        x,
        np.tanh,
        lambda v: 1.0 - np.tanh(v) ** 2,
        lambda v: -2.0 * np.tanh(v) * (1.0 - np.tanh(v) ** 2),
    )
