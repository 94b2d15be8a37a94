"""Hyperhermitian matrices and the Moore determinant.

A quaternionic ``n x n`` matrix is hyperhermitian when ``a_ij = conj(a_ji)``.
Matrices are handled as float arrays of shape ``(..., n, n, 4)``; the
:class:`HMatrix` wrapper adds validation and JSON round-tripping.

Two independent routes to the determinant are provided.  :func:`moore_det`
evaluates the cycle-ordered permutation sum and is the definitive value.
:func:`moore_det_magnitude_oracle` takes the fourth root of the determinant
of the real ``4n x 4n`` embedding, so it only recovers ``|det A|``.
"""

from __future__ import annotations

import itertools
import json
import logging
import math
from functools import lru_cache

import numpy as np

from .quaternion import qconj, qconj_transpose, qmatmul, qmul, real_matrix

logger = logging.getLogger(__name__)

__all__ = [
    "HMatrix",
    "NotHyperhermitianError",
    "hyperhermitian_basis",
    "real_embedding",
    "moore_det",
    "moore_det_magnitude_oracle",
    "mixed_discriminant",
    "is_positive_definite",
    "is_nonneg_definite",
    "aleksandrov_gap",
    "signature_of_B",
    "conj_transform",
    "diagonalize",
    "MAX_MOORE_N",
]

MAX_MOORE_N = 8
HERMITIAN_RTOL = 1e-12
QUADRUPLE_RTOL = 1e-7


class NotHyperhermitianError(ValueError):
    pass


def _check_hyperhermitian(a, rtol=HERMITIAN_RTOL):
    """Validate and symmetrize a stack of quaternionic matrices."""
    a = np.asarray(a, dtype=float)
    if a.ndim < 3 or a.shape[-1] != 4 or a.shape[-2] != a.shape[-3]:
        raise ValueError(f"expected shape (..., n, n, 4), got {a.shape}")
    adj = qconj_transpose(a)
    scale = np.max(np.abs(a)) if a.size else 0.0
    # NaN entries (grid bands) pass through unchecked
    viol = np.nanmax(np.abs(a - adj)) if a.size else 0.0
    if viol > rtol * max(scale, 1e-300) and viol > 0.0:
        raise NotHyperhermitianError(
            f"matrix is not hyperhermitian (max |a_ij - conj(a_ji)| = {viol:.3e})"
        )
    return 0.5 * (a + adj)


class HMatrix:
    """An ``n x n`` hyperhermitian quaternionic matrix.

    Parameters
    ----------
    entries : array_like, shape (n, n, 4)
        Quaternion entries in ``(t, x, y, z)`` order.  Inputs within
        ``1e-12`` relative of hyperhermitian are accepted and symmetrized.
    """

    def __init__(self, entries):
        self.entries = _check_hyperhermitian(entries)
        self.entries.setflags(write=False)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @classmethod
    def identity(cls, n: int) -> "HMatrix":
        return cls.real_diag(np.ones(n))

    @classmethod
    def real_diag(cls, diag) -> "HMatrix":
        diag = np.asarray(diag, dtype=float)
        e = np.zeros((len(diag), len(diag), 4))
        e[np.arange(len(diag)), np.arange(len(diag)), 0] = diag
        return cls(e)

    @classmethod
    def random(cls, n: int, rng: np.random.Generator, *, integer: int | None = None) -> "HMatrix":
        """Random hyperhermitian matrix; integer components in ``[-integer, integer]`` if given."""
        if integer is None:
            raw = rng.standard_normal((n, n, 4))
        else:
            raw = rng.integers(-integer, integer + 1, size=(n, n, 4)).astype(float)
        upper = np.triu(np.ones((n, n), dtype=bool), 1)
        e = np.where(upper[..., None], raw, 0.0)
        e = e + qconj_transpose(e)
        e[np.arange(n), np.arange(n)] = 0.0
        e[np.arange(n), np.arange(n), 0] = raw[np.arange(n), np.arange(n), 0]
        return cls(e)

    @classmethod
    def random_pd(cls, n: int, rng: np.random.Generator, shift: float = 0.5) -> "HMatrix":
        c = rng.standard_normal((n, n, 4))
        a = qmatmul(qconj_transpose(c), c)
        a[np.arange(n), np.arange(n), 0] += shift
        return cls(a)

    def __array__(self, dtype=None, copy=None):
        return np.array(self.entries, dtype=dtype)

    def __add__(self, other):
        return HMatrix(self.entries + np.asarray(other))

    def __sub__(self, other):
        return HMatrix(self.entries - np.asarray(other))

    def __mul__(self, scalar):
        return HMatrix(self.entries * float(scalar))

    __rmul__ = __mul__

    def minor(self, k: int) -> "HMatrix":
        """Leading principal ``k x k`` submatrix."""
        return HMatrix(self.entries[:k, :k])

    def to_json(self) -> str:
        return json.dumps({"n": self.n, "entries": self.entries.tolist()})

    @classmethod
    def from_json(cls, text: str) -> "HMatrix":
        obj = json.loads(text)
        entries = np.asarray(obj["entries"], dtype=float)
        n = int(obj["n"])
        if entries.shape != (n, n, 4):
            raise ValueError(f"entries shape {entries.shape} does not match n={n}")
        return cls(entries)

    def __repr__(self):
        return f"HMatrix(n={self.n})"


def _as_array(a):
    if isinstance(a, HMatrix):
        return a.entries
    return np.asarray(a, dtype=float)


def real_embedding(a) -> np.ndarray:
    """The symmetric ``4n x 4n`` real matrix of ``x -> Re sum conj(x_i) a_ij x_j``."""
    return real_matrix(_as_array(a))


@lru_cache(maxsize=None)
def _moore_tables(n: int):
    """Row/column index sequences and signs for every permutation of ``range(n)``.

    Each permutation is written as disjoint cycles, each cycle starting with
    its smallest element, cycles ordered by decreasing leading element.  Row
    ``p`` of the returned index arrays lists the matrix positions of the
    factors of term ``p`` in multiplication order.
    """
    rows, cols, signs = [], [], []
    for perm in itertools.permutations(range(n)):
        seen = [False] * n
        cycles = []
        for start in range(n):
            if seen[start]:
                continue
            cyc = [start]
            seen[start] = True
            k = perm[start]
            while k != start:
                cyc.append(k)
                seen[k] = True
                k = perm[k]
            cycles.append(cyc)
        # leaders are increasing by construction; the formula wants decreasing
        cycles.reverse()
        r, c = [], []
        for cyc in cycles:
            for pos, k in enumerate(cyc):
                r.append(k)
                c.append(cyc[(pos + 1) % len(cyc)])
        rows.append(r)
        cols.append(c)
        signs.append((-1) ** (n - len(cycles)))
    return np.array(rows), np.array(cols), np.array(signs, dtype=float)


def _moore_terms(a):
    n = a.shape[-2]
    rows, cols, signs = _moore_tables(n)
    factors = a[..., rows, cols, :]  # (..., nperm, n, 4)
    prod = factors[..., 0, :]
    for m in range(1, n):
        prod = qmul(prod, factors[..., m, :])
    return prod, signs


def moore_det(a, *, check: bool = True) -> np.ndarray | float:
    """Moore determinant of a hyperhermitian matrix (or a stack of them).

    Parameters
    ----------
    a : HMatrix or array_like, shape (..., n, n, 4)
    check : bool
        Validate hyperhermitian input and the vanishing of the imaginary
        part of the permutation sum.

    Returns
    -------
    float or ndarray of shape ``a.shape[:-3]``
    """
    a = _as_array(a)
    n = a.shape[-2]
    if n > MAX_MOORE_N:
        raise ValueError(f"moore_det uses an n! sum; n={n} exceeds {MAX_MOORE_N}")
    if check:
        a = _check_hyperhermitian(a)
    if n == 0:
        return np.ones(a.shape[:-3]) if a.ndim > 3 else 1.0
    prod, signs = _moore_terms(a)
    total = np.tensordot(signs, np.moveaxis(prod, -2, 0), axes=(0, 0))  # (..., 4)
    if check:
        scale = math.factorial(n) * np.maximum(1.0, np.nanmax(np.abs(a))) ** n
        imag = np.nanmax(np.abs(total[..., 1:])) if total.size else 0.0
        if imag > 1e-10 * scale:
            raise ArithmeticError(f"Moore sum has imaginary part {imag:.3e}")
    out = total[..., 0]
    return float(out) if out.ndim == 0 else out


def moore_det_magnitude_oracle(a, tol: float = 1e-9) -> float:
    """``det(real_embedding(A)) ** (1/4)``; equals ``|moore_det(A)|``."""
    a = _as_array(a)
    r = real_embedding(a)
    d = np.linalg.det(r)
    scale = max(1.0, np.max(np.abs(r))) ** r.shape[0]
    if d < -tol * scale:
        raise ArithmeticError(f"det of the real embedding is negative ({d:.3e})")
    return float(max(d, 0.0) ** 0.25)


def mixed_discriminant(mats) -> np.ndarray | float:
    """Mixed discriminant ``det(A_1, ..., A_n)`` by polarization.

    Uses ``n! det(A_1..A_n) = sum_S (-1)^(n-|S|) det(sum_{i in S} A_i)``.
    ``mats`` is a sequence of ``n`` matrices, each of shape ``(..., n, n, 4)``
    with matching leading axes.
    """
    mats = [_as_array(m) for m in mats]
    if not mats:
        raise ValueError("need at least one matrix")
    n = mats[0].shape[-2]
    if len(mats) != n or any(m.shape[-3:] != (n, n, 4) for m in mats):
        raise ValueError(f"mixed discriminant needs {n} matrices of size {n}x{n}")
    stacked = np.stack(np.broadcast_arrays(*mats), axis=0)
    masks = np.array(list(itertools.product((0, 1), repeat=n)), dtype=float)[1:]
    signs = (-1.0) ** (n - masks.sum(axis=1))
    sums = np.tensordot(masks, stacked, axes=(1, 0))  # (2^n - 1, ..., n, n, 4)
    dets = moore_det(sums, check=False)
    total = np.tensordot(signs, dets, axes=(0, 0))
    out = total / math.factorial(n)
    return float(out) if np.ndim(out) == 0 else out


def is_positive_definite(a, rtol: float = 1e-12) -> bool:
    """Sylvester criterion: every leading principal Moore minor is positive.

    A minor counts as positive when it exceeds ``rtol * max|a|^k`` so that
    exactly singular matrices with rounding noise are not misclassified.
    """
    a = _check_hyperhermitian(_as_array(a))
    n = a.shape[0]
    scale = max(np.max(np.abs(a)), 1e-300)
    for k in range(1, n + 1):
        if moore_det(a[:k, :k], check=False) <= rtol * scale**k:
            return False
    return True


def is_nonneg_definite(a, rtol: float = 1e-9) -> bool:
    """Non-negative definiteness via the smallest eigenvalue of the real embedding."""
    a = _as_array(a)
    lam = np.linalg.eigvalsh(real_embedding(a))
    return bool(lam[0] >= -rtol * (1.0 + np.max(np.abs(a))))


def hyperhermitian_basis(n: int) -> np.ndarray:
    """Real basis of the ``n(2n-1)``-dimensional space of hyperhermitian matrices.

    Order: ``E_rr`` for each ``r``, then for each ``r < s`` the matrices with
    ``u`` at ``(r, s)`` and ``conj(u)`` at ``(s, r)`` for ``u = 1, i, j, k``.
    """
    basis = []
    for r in range(n):
        e = np.zeros((n, n, 4))
        e[r, r, 0] = 1.0
        basis.append(e)
    for r in range(n):
        for s in range(r + 1, n):
            for u in np.eye(4):
                e = np.zeros((n, n, 4))
                e[r, s] = u
                e[s, r] = qconj(u)
                basis.append(e)
    return np.array(basis)


def _require_pd(mats, what):
    for m in mats:
        if not is_positive_definite(m):
            raise ValueError(f"{what}: inputs must be positive definite")


def aleksandrov_gap(mats, x) -> float:
    """``det(A_1..A_{n-1}, X)^2 - det(A_1..A_{n-1}, A_{n-1}) det(A_1..A_{n-2}, X, X)``."""
    mats = [_as_array(m) for m in mats]
    x = _as_array(x)
    n = x.shape[0]
    if len(mats) != n - 1:
        raise ValueError(f"need {n - 1} positive definite matrices for n={n}")
    _require_pd(mats, "aleksandrov_gap")
    lhs = mixed_discriminant(mats + [x]) ** 2
    rhs = mixed_discriminant(mats + [mats[-1]]) * mixed_discriminant(mats[:-1] + [x, x])
    return float(lhs - rhs)


def signature_of_B(mats, n: int | None = None, rtol: float = 1e-9):
    """Signature of ``B(X, Y) = det(X, Y, A_1, ..., A_{n-2})`` on hyperhermitian matrices.

    Returns
    -------
    (pluses, minuses, zeros) : tuple of int
        Eigenvalues of the Gram matrix within ``rtol`` of the largest one in
        magnitude count as zeros; a nonzero count is logged as a numerical
        failure.
    """
    mats = [_as_array(m) for m in mats]
    if n is None:
        if not mats:
            raise ValueError("pass n when no fixed matrices are given")
        n = mats[0].shape[0]
    if n < 2 or len(mats) != n - 2:
        raise ValueError(f"need n >= 2 and {n - 2} fixed matrices")
    _require_pd(mats, "signature_of_B")
    basis = hyperhermitian_basis(n)
    dim = len(basis)
    ia, ib = np.triu_indices(dim)
    args = [basis[ia], basis[ib]] + [np.broadcast_to(m, (len(ia), n, n, 4)) for m in mats]
    vals = mixed_discriminant(args)
    gram = np.zeros((dim, dim))
    gram[ia, ib] = vals
    gram[ib, ia] = vals
    lam = np.linalg.eigvalsh(gram)
    tol = rtol * np.max(np.abs(lam))
    plus = int(np.sum(lam > tol))
    minus = int(np.sum(lam < -tol))
    zero = dim - plus - minus
    if zero:
        logger.warning("signature_of_B: degenerate form (%d near-zero eigenvalues)", zero)
    return plus, minus, zero


def conj_transform(a, c) -> HMatrix:
    """``C* A C`` for hyperhermitian ``A`` and an arbitrary quaternionic ``C``."""
    a = _check_hyperhermitian(_as_array(a))
    c = np.asarray(c, dtype=float)
    return HMatrix(qmatmul(qmatmul(qconj_transpose(c), a), c))


def _quaternionic_gram_schmidt(vecs, tol=1e-6):
    """Pick an orthonormal quaternionic basis from real vectors spanning an H-subspace."""
    basis = []
    remaining = [v.reshape(-1, 4) for v in vecs]
    while remaining:
        resid = []
        for v in remaining:
            w = v.copy()
            for u in basis:
                coef = np.sum(qmul(qconj(u), w), axis=0)  # (u, w)
                w = w - qmul(u, coef[None, :])
            resid.append(w)
        norms = [np.sqrt(np.sum(w * w)) for w in resid]
        best = int(np.argmax(norms))
        if norms[best] < tol:
            break
        basis.append(resid[best] / norms[best])
        remaining = [w for i, w in enumerate(resid) if i != best]
    return basis


def diagonalize(a):
    """Real eigenvalues (descending) and a unitary ``U`` with ``A = U diag(lam) U*``.

    Works through the real embedding, whose spectrum repeats every eigenvalue
    exactly four times; eigenvectors of each cluster are orthonormalized over
    the quaternions.

    Returns
    -------
    eigenvalues : ndarray, shape (n,)
    U : ndarray, shape (n, n, 4)
    """
    a = _check_hyperhermitian(_as_array(a))
    n = a.shape[0]
    lam, vec = np.linalg.eigh(real_embedding(a))
    lam, vec = lam[::-1], vec[:, ::-1]
    scale = max(1.0, np.max(np.abs(lam)))
    quads = lam.reshape(n, 4)
    if np.any(quads.max(axis=1) - quads.min(axis=1) > QUADRUPLE_RTOL * scale):
        raise ArithmeticError("real-embedding spectrum does not split into quadruples")
    eig = quads.mean(axis=1)
    cols = []
    start = 0
    while start < 4 * n:
        stop = start + 4
        while stop < 4 * n and abs(lam[stop] - lam[start]) <= QUADRUPLE_RTOL * scale:
            stop += 4
        chosen = _quaternionic_gram_schmidt(list(vec[:, start:stop].T))
        if len(chosen) != (stop - start) // 4:
            raise ArithmeticError("eigenspace is not a quaternionic subspace")
        cols.extend(chosen)
        start = stop
    u = np.stack(cols, axis=1)  # (n rows, n cols, 4)
    return eig, u
