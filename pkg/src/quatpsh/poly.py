"""Sparse multivariate polynomials with array-valued coefficients.

Coefficients share one shape: ``()`` for real or complex scalars, ``(4,)`` for
quaternions.  Differentiation is exact; evaluation is vectorized over points.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

__all__ = ["Polynomial"]


class Polynomial:
    """Polynomial in ``nvars`` real variables.

    Parameters
    ----------
    nvars : int
    terms : dict mapping exponent tuples to coefficients
    coeff_shape : tuple
    dtype : numpy dtype (float or complex)
    """

    def __init__(self, nvars: int, terms=None, coeff_shape=(), dtype=float):
        self.nvars = int(nvars)
        self.coeff_shape = tuple(coeff_shape)
        self.dtype = np.dtype(dtype)
        self.terms: dict[tuple, np.ndarray] = {}
        for exps, c in (terms or {}).items():
            exps = tuple(int(e) for e in exps)
            if len(exps) != self.nvars or min(exps, default=0) < 0:
                raise ValueError(f"bad exponent vector {exps}")
            c = np.broadcast_to(np.asarray(c, dtype=self.dtype), self.coeff_shape).copy()
            if exps in self.terms:
                self.terms[exps] = self.terms[exps] + c
            else:
                self.terms[exps] = c
        self._prune()

    def _prune(self):
        self.terms = {e: c for e, c in self.terms.items() if np.any(c != 0)}

    def _like(self, terms, coeff_shape=None, dtype=None):
        return Polynomial(
            self.nvars,
            terms,
            self.coeff_shape if coeff_shape is None else coeff_shape,
            self.dtype if dtype is None else dtype,
        )

    @classmethod
    def zero(cls, nvars, coeff_shape=(), dtype=float):
        return cls(nvars, {}, coeff_shape, dtype)

    @classmethod
    def constant(cls, nvars, value, coeff_shape=(), dtype=float):
        return cls(nvars, {(0,) * nvars: value}, coeff_shape, dtype)

    @classmethod
    def variable(cls, nvars, index, coeff_shape=(), dtype=float):
        one = np.zeros(coeff_shape, dtype=dtype)
        if coeff_shape:
            one.flat[0] = 1
        else:
            one = np.asarray(1, dtype=dtype)
        exps = [0] * nvars
        exps[index] = 1
        return cls(nvars, {tuple(exps): one}, coeff_shape, dtype)

    # -- structure ---------------------------------------------------------
    def __len__(self):
        return len(self.terms)

    @property
    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    def max_abs_coeff(self) -> float:
        return max((float(np.max(np.abs(c))) for c in self.terms.values()), default=0.0)

    def is_zero(self, atol: float = 0.0) -> bool:
        return self.max_abs_coeff() <= atol

    def astype(self, dtype):
        return self._like(self.terms, dtype=dtype)

    def map_coeffs(self, fn: Callable, coeff_shape=None, dtype=None) -> "Polynomial":
        return self._like(
            {e: fn(c) for e, c in self.terms.items()}, coeff_shape=coeff_shape, dtype=dtype
        )

    def component(self, idx) -> "Polynomial":
        """Scalar polynomial of one coefficient component."""
        return self.map_coeffs(lambda c: c[idx], coeff_shape=())

    # -- arithmetic --------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, Polynomial):
            if other.nvars != self.nvars:
                raise ValueError("variable count mismatch")
            return other
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return self + Polynomial.constant(self.nvars, other, self.coeff_shape, self.dtype)
        dtype = np.result_type(self.dtype, o.dtype)
        shape = np.broadcast_shapes(self.coeff_shape, o.coeff_shape)
        terms = {e: np.broadcast_to(c, shape).astype(dtype) for e, c in self.terms.items()}
        for e, c in o.terms.items():
            terms[e] = terms.get(e, np.zeros(shape, dtype)) + c
        return Polynomial(self.nvars, terms, shape, dtype)

    __radd__ = __add__

    def __neg__(self):
        return self.map_coeffs(lambda c: -c)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def mul(self, other: "Polynomial", coef_mul: Callable | None = None) -> "Polynomial":
        """Product; ``coef_mul`` multiplies coefficient pairs (default: broadcasting ``*``)."""
        o = self._coerce(other)
        if coef_mul is None:
            coef_mul = np.multiply
        terms: dict[tuple, np.ndarray] = {}
        shape = None
        dtype = np.result_type(self.dtype, o.dtype)
        for e1, c1 in self.terms.items():
            for e2, c2 in o.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                c = np.asarray(coef_mul(c1, c2))
                shape = c.shape
                terms[e] = terms[e] + c if e in terms else c
        if shape is None:
            shape = np.broadcast_shapes(self.coeff_shape, o.coeff_shape)
        return Polynomial(self.nvars, terms, shape, dtype)

    def __mul__(self, other):
        if isinstance(other, Polynomial):
            return self.mul(other)
        other = np.asarray(other)
        if other.ndim:
            raise TypeError("multiply by a scalar or a Polynomial")
        dtype = np.result_type(self.dtype, other.dtype)
        return self.map_coeffs(lambda c: c * other, dtype=dtype)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        out = Polynomial.constant(self.nvars, 1, (), self.dtype)
        for _ in range(int(k)):
            out = out * self
        return out

    def conj(self) -> "Polynomial":
        return self.map_coeffs(np.conj)

    # -- calculus ----------------------------------------------------------
    def diff(self, var: int) -> "Polynomial":
        terms = {}
        for e, c in self.terms.items():
            if e[var] == 0:
                continue
            e2 = list(e)
            e2[var] -= 1
            terms[tuple(e2)] = c * e[var]
        return self._like(terms)

    # -- evaluation --------------------------------------------------------
    def _arrays(self):
        if not self.terms:
            return np.zeros((0, self.nvars), dtype=int), np.zeros((0,) + self.coeff_shape, self.dtype)
        exps = np.array(list(self.terms.keys()), dtype=int)
        coeffs = np.array(list(self.terms.values()), dtype=self.dtype)
        return exps, coeffs

    def __call__(self, points) -> np.ndarray:
        """Evaluate at points of shape ``(..., nvars)``; returns ``(..., *coeff_shape)``."""
        pts = np.asarray(points, dtype=float)
        lead = pts.shape[:-1]
        pts = pts.reshape(-1, self.nvars)
        exps, coeffs = self._arrays()
        if len(exps) == 0:
            return np.zeros(lead + self.coeff_shape, dtype=self.dtype)
        mono = np.ones((len(pts), len(exps)))
        for v in range(self.nvars):
            col = exps[:, v]
            if np.any(col):
                mono *= pts[:, v : v + 1] ** col[None, :]
        out = np.tensordot(mono, coeffs, axes=(1, 0))
        return out.reshape(lead + self.coeff_shape)

    def evaluate_generic(self, coords):
        """Evaluate on arbitrary ring elements (e.g. :class:`~quatpsh.jet.Jet`).

        Only real scalar coefficients are supported; quaternion coefficients
        are handled component by component by the caller.
        """
        if self.coeff_shape:
            raise ValueError("evaluate_generic needs scalar coefficients")
        total = 0.0
        cache: dict[tuple[int, int], object] = {}

        def power(v, k):
            if (v, k) not in cache:
                cache[(v, k)] = coords[v] if k == 1 else power(v, k - 1) * coords[v]
            return cache[(v, k)]

        for e, c in self.terms.items():
            term = float(np.real(c))
            for v, k in enumerate(e):
                if k:
                    term = power(v, k) * term
            total = total + term
        return total

    def compose_linear(self, matrix, offset=None) -> "Polynomial":
        """Substitute ``x -> matrix @ x + offset``."""
        matrix = np.asarray(matrix, dtype=float)
        m = matrix.shape[1]
        offset = np.zeros(self.nvars) if offset is None else np.asarray(offset, dtype=float)
        lin = []
        for v in range(self.nvars):
            terms = {(0,) * m: offset[v]}
            for k in range(m):
                if matrix[v, k] != 0:
                    ek = [0] * m
                    ek[k] = 1
                    terms[tuple(ek)] = matrix[v, k]
            lin.append(Polynomial(m, terms))
        powers: dict[tuple[int, int], Polynomial] = {}

        def power(v, k):
            if (v, k) not in powers:
                powers[(v, k)] = lin[v] if k == 1 else power(v, k - 1) * lin[v]
            return powers[(v, k)]

        out = Polynomial.zero(m, self.coeff_shape, self.dtype)
        for e, c in self.terms.items():
            mono = Polynomial.constant(m, 1.0)
            for v, k in enumerate(e):
                if k:
                    mono = mono * power(v, k)
            out = out + mono.mul(
                Polynomial.constant(m, c, self.coeff_shape, self.dtype),
            )
        return out

    # -- comparison / io ---------------------------------------------------
    def allclose(self, other: "Polynomial", atol: float = 1e-12) -> bool:
        return (self - other).is_zero(atol)

    def to_terms(self) -> list[dict]:
        out = []
        for e, c in sorted(self.terms.items()):
            c = np.asarray(c)
            out.append({"exponent": list(e), "coef": c.tolist()})
        return out

    def __repr__(self):
        return f"Polynomial(nvars={self.nvars}, terms={len(self.terms)}, coeff_shape={self.coeff_shape})"
