"""Convex bodies in ``R^d`` (``d = 4n``) represented by their support functions.

Every body evaluates ``h_K(y) = sup_{x in K} <y, x>`` on stacks of
directions and the symmetric second difference
``h(y - z) + h(y + z) - 2 h(y)`` used by the mollified Hessian.  Composite
bodies override the second difference so that translations drop out
exactly and scalings act exactly linearly.
"""

from __future__ import annotations

import json

import numpy as np

__all__ = [
    "ConvexBody",
    "Polytope",
    "Box",
    "Ball",
    "HalfBall",
    "Embedded",
    "MinkowskiSum",
    "Scaled",
    "Translated",
    "Hull",
    "Intersection",
    "support",
    "hausdorff_distance",
    "body_from_dict",
    "body_from_json",
    "sphere_directions",
]


class ConvexBody:
    dim: int

    def support(self, y) -> np.ndarray:
        raise NotImplementedError

    def second_difference(self, y, z) -> np.ndarray:
        """``h(y - z) + h(y + z) - 2 h(y)`` for ``y`` of shape ``(P, d)`` and ``z`` of shape ``(m, d)``.

        Returns shape ``(P, m)``.
        """
        y = np.asarray(y, dtype=float)
        z = np.asarray(z, dtype=float)
        a = self.support(y[:, None, :] - z[None, :, :])
        b = self.support(y[:, None, :] + z[None, :, :])
        return a + b - 2.0 * self.support(y)[:, None]

    def to_dict(self) -> dict:
        raise NotImplementedError

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    def __add__(self, other: "ConvexBody") -> "ConvexBody":
        return MinkowskiSum([self, other])

    def translate(self, v) -> "ConvexBody":
        return Translated(self, v)

    def scale(self, lam: float) -> "ConvexBody":
        return Scaled(self, lam)

    def _check(self, y):
        y = np.asarray(y, dtype=float)
        if y.shape[-1] != self.dim:
            raise ValueError(f"directions must have {self.dim} coordinates")
        return y


class Polytope(ConvexBody):
    """Convex hull of finitely many vertices."""

    def __init__(self, vertices):
        v = np.atleast_2d(np.asarray(vertices, dtype=float))
        if v.ndim != 2 or len(v) == 0:
            raise ValueError("vertices must be a non-empty (m, d) array")
        self.vertices = v
        self.dim = v.shape[1]

    def support(self, y):
        y = self._check(y)
        return np.max(y @ self.vertices.T, axis=-1)

    def to_dict(self):
        return {"type": "polytope", "vertices": self.vertices.tolist()}


class Box(ConvexBody):
    """Axis-parallel box ``prod [lo_c, hi_c]``."""

    def __init__(self, lo, hi):
        self.lo = np.asarray(lo, dtype=float)
        self.hi = np.asarray(hi, dtype=float)
        if self.lo.shape != self.hi.shape or np.any(self.lo > self.hi):
            raise ValueError("box needs lo <= hi of equal length")
        self.dim = len(self.lo)

    @classmethod
    def cube(cls, dim: int, half: float = 1.0) -> "Box":
        return cls(-half * np.ones(dim), half * np.ones(dim))

    def support(self, y):
        y = self._check(y)
        return np.sum(np.maximum(y * self.lo, y * self.hi), axis=-1)

    def to_dict(self):
        return {"type": "box", "lo": self.lo.tolist(), "hi": self.hi.tolist()}


class Ball(ConvexBody):
    def __init__(self, center, radius: float):
        self.center = np.asarray(center, dtype=float)
        self.radius = float(radius)
        if self.radius < 0:
            raise ValueError("radius must be non-negative")
        self.dim = len(self.center)

    def support(self, y):
        y = self._check(y)
        return y @ self.center + self.radius * np.linalg.norm(y, axis=-1)

    def to_dict(self):
        return {"type": "ball", "center": self.center.tolist(), "radius": self.radius}


class HalfBall(ConvexBody):
    """``{x in Ball(c, r) : <x - c, u> >= 0}`` for a unit normal ``u``."""

    def __init__(self, center, radius: float, normal):
        self.center = np.asarray(center, dtype=float)
        self.radius = float(radius)
        u = np.asarray(normal, dtype=float)
        self.normal = u / np.linalg.norm(u)
        self.dim = len(self.center)

    def support(self, y):
        y = self._check(y)
        s = y @ self.normal
        flat = np.linalg.norm(y - s[..., None] * self.normal, axis=-1)
        return y @ self.center + self.radius * np.where(s >= 0.0, np.linalg.norm(y, axis=-1), flat)

    def to_dict(self):
        return {
            "type": "half_ball",
            "center": self.center.tolist(),
            "radius": self.radius,
            "normal": self.normal.tolist(),
        }


class Embedded(ConvexBody):
    """A body of a coordinate subspace, placed in ``R^dim`` along ``coords``."""

    def __init__(self, base: ConvexBody, coords, dim: int):
        self.base = base
        self.coords = tuple(int(c) for c in coords)
        if len(self.coords) != base.dim:
            raise ValueError("one coordinate per dimension of the base body")
        self.dim = int(dim)

    def support(self, y):
        y = self._check(y)
        return self.base.support(y[..., list(self.coords)])

    def second_difference(self, y, z):
        c = list(self.coords)
        return self.base.second_difference(np.asarray(y)[:, c], np.asarray(z)[:, c])

    def to_dict(self):
        return {"type": "embedded", "base": self.base.to_dict(), "coords": list(self.coords), "dim": self.dim}


class MinkowskiSum(ConvexBody):
    def __init__(self, bodies):
        self.bodies = list(bodies)
        dims = {b.dim for b in self.bodies}
        if len(dims) != 1:
            raise ValueError("summands must share a dimension")
        self.dim = dims.pop()

    def support(self, y):
        return sum(b.support(y) for b in self.bodies)

    def second_difference(self, y, z):
        return sum(b.second_difference(y, z) for b in self.bodies)

    def to_dict(self):
        return {"type": "minkowski_sum", "bodies": [b.to_dict() for b in self.bodies]}


class Scaled(ConvexBody):
    def __init__(self, base: ConvexBody, lam: float):
        if lam < 0:
            raise ValueError("scaling factor must be non-negative")
        self.base = base
        self.lam = float(lam)
        self.dim = base.dim

    def support(self, y):
        return self.lam * self.base.support(y)

    def second_difference(self, y, z):
        return self.lam * self.base.second_difference(y, z)

    def to_dict(self):
        return {"type": "scaled", "base": self.base.to_dict(), "factor": self.lam}


class Translated(ConvexBody):
    def __init__(self, base: ConvexBody, v):
        self.base = base
        self.v = np.asarray(v, dtype=float)
        self.dim = base.dim
        if self.v.shape != (self.dim,):
            raise ValueError("translation vector has the wrong length")

    def support(self, y):
        y = self._check(y)
        return self.base.support(y) + y @ self.v

    def second_difference(self, y, z):
        # the linear term has vanishing second difference
        return self.base.second_difference(y, z)

    def to_dict(self):
        return {"type": "translated", "base": self.base.to_dict(), "vector": self.v.tolist()}


class Hull(ConvexBody):
    """Convex hull of a union; its support function is the pointwise max."""

    def __init__(self, a: ConvexBody, b: ConvexBody):
        if a.dim != b.dim:
            raise ValueError("bodies must share a dimension")
        self.a, self.b, self.dim = a, b, a.dim

    def support(self, y):
        return np.maximum(self.a.support(y), self.b.support(y))

    def to_dict(self):
        return {"type": "hull", "a": self.a.to_dict(), "b": self.b.to_dict()}


class Intersection(ConvexBody):
    """Pointwise min of two support functions.

    This is the support function of ``a`` intersected with ``b`` whenever the
    union of ``a`` and ``b`` is convex; that is the caller's responsibility.
    """

    def __init__(self, a: ConvexBody, b: ConvexBody):
        if a.dim != b.dim:
            raise ValueError("bodies must share a dimension")
        self.a, self.b, self.dim = a, b, a.dim

    def support(self, y):
        return np.minimum(self.a.support(y), self.b.support(y))

    def to_dict(self):
        return {"type": "intersection", "a": self.a.to_dict(), "b": self.b.to_dict()}


def support(body: ConvexBody, y) -> np.ndarray:
    return body.support(y)


def sphere_directions(m: int, dim: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.standard_normal((m, dim))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def hausdorff_distance(k1: ConvexBody, k2: ConvexBody, directions) -> float:
    """``max |h_1 - h_2|`` over sampled unit directions (a lower bound)."""
    d = np.asarray(directions, dtype=float)
    return float(np.max(np.abs(k1.support(d) - k2.support(d))))


def body_from_dict(obj: dict) -> ConvexBody:
    t = obj["type"]
    if t == "polytope":
        return Polytope(obj["vertices"])
    if t == "box":
        return Box(obj["lo"], obj["hi"])
    if t == "cube":
        return Box.cube(int(obj["dim"]), float(obj.get("half", 1.0)))
    if t == "ball":
        return Ball(obj["center"], obj["radius"])
    if t == "half_ball":
        return HalfBall(obj["center"], obj["radius"], obj["normal"])
    if t == "embedded":
        return Embedded(body_from_dict(obj["base"]), obj["coords"], obj["dim"])
    if t == "minkowski_sum":
        return MinkowskiSum([body_from_dict(b) for b in obj["bodies"]])
    if t == "scaled":
        return Scaled(body_from_dict(obj["base"]), obj["factor"])
    if t == "translated":
        return Translated(body_from_dict(obj["base"]), obj["vector"])
    if t == "hull":
        return Hull(body_from_dict(obj["a"]), body_from_dict(obj["b"]))
    if t == "intersection":
        return Intersection(body_from_dict(obj["a"]), body_from_dict(obj["b"]))
    raise ValueError(f"unknown body type {t!r}")


def body_from_json(text: str) -> ConvexBody:
    return body_from_dict(json.loads(text))
