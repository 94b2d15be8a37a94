"""Quaternion arithmetic.

Quaternions are stored as float arrays whose last axis holds the components
``(t, x, y, z)`` of ``q = t + x i + y j + z k``.  The array functions
(:func:`qmul`, :func:`qconj`, ...) broadcast over leading axes and are what
the rest of the package uses; :class:`Quaternion` is a thin scalar wrapper for
interactive use.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "Quaternion",
    "qmul",
    "qconj",
    "qnorm_sq",
    "qinv",
    "qmatmul",
    "qconj_transpose",
    "left_matrix",
    "right_matrix",
    "real_matrix",
    "UNITS",
]

#: the basis 1, i, j, k as rows
UNITS = np.eye(4)


def qmul(p, q):
    """Hamilton product ``p * q`` of quaternion arrays (broadcasting)."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    p0, p1, p2, p3 = np.moveaxis(p, -1, 0)
    q0, q1, q2, q3 = np.moveaxis(q, -1, 0)
    return np.stack(
        [
            p0 * q0 - p1 * q1 - p2 * q2 - p3 * q3,
            p0 * q1 + p1 * q0 + p2 * q3 - p3 * q2,
            p0 * q2 - p1 * q3 + p2 * q0 + p3 * q1,
            p0 * q3 + p1 * q2 - p2 * q1 + p3 * q0,
        ],
        axis=-1,
    )


def qconj(q):
    q = np.asarray(q, dtype=float)
    return q * np.array([1.0, -1.0, -1.0, -1.0])


def qnorm_sq(q):
    q = np.asarray(q, dtype=float)
    return np.sum(q * q, axis=-1)


def qinv(q):
    """Multiplicative inverse; raises ``ZeroDivisionError`` on zero entries."""
    q = np.asarray(q, dtype=float)
    nsq = qnorm_sq(q)
    if np.any(nsq == 0.0):
        raise ZeroDivisionError("quaternion inverse of zero")
    return qconj(q) / nsq[..., None]


def qmatmul(a, b):
    """Product of quaternionic matrices of shapes ``(..., n, m, 4)`` and ``(..., m, p, 4)``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    # (..., n, m, 1, 4) * (..., 1, m, p, 4) summed over m
    prod = qmul(a[..., :, :, None, :], b[..., None, :, :, :])
    return prod.sum(axis=-3)


def qconj_transpose(a):
    """``A*``: conjugate every entry and swap the two matrix axes."""
    return np.swapaxes(qconj(a), -2, -3)


def left_matrix(a):
    """Real 4x4 matrix of ``v -> a v`` (columns are ``a e_c``)."""
    a = np.asarray(a, dtype=float)
    return np.stack([qmul(a, e) for e in UNITS], axis=-1)


def right_matrix(a):
    """Real 4x4 matrix of ``v -> v a``."""
    a = np.asarray(a, dtype=float)
    return np.stack([qmul(e, a) for e in UNITS], axis=-1)


def real_matrix(a):
    """Real ``4n x 4m`` matrix of the left action ``v -> A v`` on ``H^m``.

    Coordinates of ``H^m`` are ordered variable by variable, each as
    ``(t, x, y, z)``.  For a hyperhermitian ``A`` this is the symmetric matrix
    of the real quadratic form ``Re sum conj(v_i) a_ij v_j``.
    """
    a = np.asarray(a, dtype=float)
    n, m = a.shape[-3], a.shape[-2]
    blocks = left_matrix(a)  # (..., n, m, 4, 4)
    blocks = np.swapaxes(blocks, -3, -2)  # (..., n, 4, m, 4)
    return blocks.reshape(a.shape[:-3] + (4 * n, 4 * m))


class Quaternion:
    """A single quaternion ``t + x i + y j + z k`` with value semantics."""

    __slots__ = ("_c",)

    def __init__(self, t=0.0, x=0.0, y=0.0, z=0.0):
        self._c = np.array([t, x, y, z], dtype=float)
        self._c.setflags(write=False)

    @classmethod
    def from_array(cls, arr) -> "Quaternion":
        arr = np.asarray(arr, dtype=float)
        if arr.shape != (4,):
            raise ValueError(f"expected 4 components, got shape {arr.shape}")
        return cls(*arr)

    @property
    def t(self) -> float:
        return float(self._c[0])

    @property
    def x(self) -> float:
        return float(self._c[1])

    @property
    def y(self) -> float:
        return float(self._c[2])

    @property
    def z(self) -> float:
        return float(self._c[3])

    @property
    def components(self) -> np.ndarray:
        return self._c

    def __array__(self, dtype=None, copy=None):
        return np.array(self._c, dtype=dtype)

    def tolist(self) -> list[float]:
        return [float(c) for c in self._c]

    def conj(self) -> "Quaternion":
        return Quaternion.from_array(qconj(self._c))

    def norm_sq(self) -> float:
        return float(qnorm_sq(self._c))

    def inverse(self) -> "Quaternion":
        return Quaternion.from_array(qinv(self._c))

    @staticmethod
    def _coerce(other):
        if isinstance(other, Quaternion):
            return other._c
        if np.isscalar(other):
            return np.array([float(other), 0.0, 0.0, 0.0])
        return None

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return Quaternion.from_array(qmul(self._c, o))

    def __rmul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return Quaternion.from_array(qmul(o, self._c))

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return Quaternion.from_array(self._c + o)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return Quaternion.from_array(self._c - o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return Quaternion.from_array(o - self._c)

    def __neg__(self):
        return Quaternion.from_array(-self._c)

    def __truediv__(self, other):
        if np.isscalar(other):
            return Quaternion.from_array(self._c / float(other))
        return NotImplemented

    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return bool(np.array_equal(self._c, o))

    def __hash__(self):
        return hash(tuple(self._c))

    def __repr__(self):
        t, x, y, z = self._c
        return f"Quaternion({t!r}, {x!r}, {y!r}, {z!r})"


def mul(p: Quaternion, q: Quaternion) -> Quaternion:
    return p * q


def conj(q: Quaternion) -> Quaternion:
    return q.conj()


def norm_sq(q: Quaternion) -> float:
    return q.norm_sq()


def inverse(q: Quaternion) -> Quaternion:
    return q.inverse()


I = Quaternion(0, 1, 0, 0)
J = Quaternion(0, 0, 1, 0)
K = Quaternion(0, 0, 0, 1)
ONE = Quaternion(1, 0, 0, 0)

__all__ += ["mul", "conj", "norm_sq", "inverse", "I", "J", "K", "ONE"]
