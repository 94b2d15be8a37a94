"""Dolbeault-type calculus on flat ``H^n`` with the right-acting complex structures.

Each quaternionic variable ``q = t + x i + y j + z k`` is split as
``q = w1 + j w2`` with ``w1 = t + x i`` and ``w2 = y - z i``.  Right
multiplication by ``i`` acts on ``(w1, w2)`` as multiplication by ``i``, so
``w1, w2`` are holomorphic coordinates for ``I``.  Right multiplication by
``j`` sends ``(w1, w2)`` to ``(-conj w2, conj w1)``.

Forms are stored sparsely: a sorted tuple of basis indices maps to a
complex polynomial in the ``4n`` real coordinates.  Index ``a < 2n`` stands
for ``dw_a``, index ``2n + a`` for ``d conj(w_a)``, with complex coordinate
``a = 2r + s`` for variable ``r`` and part ``s``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .dirac import HessianField
from .fields import PolyField
from .hyperherm import is_positive_definite
from .poly import Polynomial
from .quaternion import UNITS, right_matrix

__all__ = [
    "SignTable",
    "SIGN_TABLE",
    "Form",
    "complex_partial",
    "del_",
    "delbar",
    "J_act",
    "J_inv",
    "del_J",
    "ddJ",
    "is_real",
    "select_sign_table",
    "theta_matrix",
    "right_action_matrix",
    "real_bilinear",
    "t_map_matrix",
    "t_map",
    "is_nonneg",
    "HKTReport",
    "hkt_flat_check",
]


@dataclass(frozen=True)
class SignTable:
    """``J dw_{r,1} = c1 conj(dw_{r,2})`` and ``J dw_{r,2} = c2 conj(dw_{r,1})``."""

    c1: int
    c2: int

    def image(self, e: int, n: int) -> tuple[int, int]:
        """Coefficient and index of the image of basis covector ``e``."""
        hol = e < 2 * n
        a = e if hol else e - 2 * n
        r, s = divmod(a, 2)
        coef = self.c1 if s == 0 else self.c2
        b = 2 * r + (1 - s)
        return coef, (b + 2 * n if hol else b)


# chosen by select_sign_table; agrees with the pullback under right multiplication by j
SIGN_TABLE = SignTable(-1, 1)


def complex_partial(poly: Polynomial, a: int, bar: bool = False) -> Polynomial:
    """``d/dw_a`` (or ``d/d conj(w_a)``) of a polynomial in the real coordinates."""
    r, s = divmod(a, 2)
    base = 4 * r
    if s == 0:
        re, im, sign = base, base + 1, (1j if bar else -1j)
    else:
        re, im, sign = base + 2, base + 3, (-1j if bar else 1j)
    p = poly.astype(complex)
    return (p.diff(re) + p.diff(im) * sign) * 0.5


def _sort_sign(idx):
    """Sort indices; return ``(sign, tuple)`` or ``(0, None)`` on a repeat."""
    idx = list(idx)
    if len(set(idx)) != len(idx):
        return 0, None
    sign = 1
    for i in range(len(idx)):
        for j in range(len(idx) - 1 - i):
            if idx[j] > idx[j + 1]:
                idx[j], idx[j + 1] = idx[j + 1], idx[j]
                sign = -sign
    return sign, tuple(idx)


class Form:
    """Complex differential form with polynomial coefficients on ``H^n``."""

    def __init__(self, n: int, terms: dict | None = None):
        self.n = n
        self.terms: dict[tuple, Polynomial] = {}
        for idx, c in (terms or {}).items():
            sign, key = _sort_sign(idx)
            if sign == 0:
                continue
            c = c.astype(complex) * sign
            self.terms[key] = self.terms[key] + c if key in self.terms else c
        self.terms = {k: v for k, v in self.terms.items() if len(v)}

    @property
    def nvars(self) -> int:
        return 4 * self.n

    @classmethod
    def function(cls, f) -> "Form":
        if isinstance(f, PolyField):
            n, poly = f.n, f.real_part()
        else:
            poly = f
            n = poly.nvars // 4
        return cls(n, {(): poly.astype(complex)})

    def bidegree(self, key) -> tuple[int, int]:
        p = sum(1 for e in key if e < 2 * self.n)
        return p, len(key) - p

    @property
    def bidegrees(self) -> set:
        return {self.bidegree(k) for k in self.terms}

    def part(self, p: int, q: int) -> "Form":
        return Form(self.n, {k: v for k, v in self.terms.items() if self.bidegree(k) == (p, q)})

    def __add__(self, other: "Form") -> "Form":
        terms = dict(self.terms)
        for k, v in other.terms.items():
            terms[k] = terms[k] + v if k in terms else v
        return Form(self.n, terms)

    def __neg__(self):
        return Form(self.n, {k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, scalar):
        return Form(self.n, {k: v * complex(scalar) for k, v in self.terms.items()})

    __rmul__ = __mul__

    def conj(self) -> "Form":
        """Complex conjugate: conjugate coefficients and swap ``dw`` with ``d conj(w)``."""
        m = 2 * self.n
        return Form(self.n, {tuple((e + m) % (2 * m) for e in k): v.conj() for k, v in self.terms.items()})

    def max_abs_coeff(self) -> float:
        return max((v.max_abs_coeff() for v in self.terms.values()), default=0.0)

    def is_zero(self, atol: float = 0.0) -> bool:
        return self.max_abs_coeff() <= atol

    def __repr__(self):
        return f"Form(n={self.n}, bidegrees={sorted(self.bidegrees)}, terms={len(self.terms)})"


def _d(form: Form, bar: bool) -> Form:
    m = 2 * form.n
    terms = {}
    for key, c in form.terms.items():
        for a in range(m):
            dc = complex_partial(c, a, bar)
            if not len(dc):
                continue
            e = a + m if bar else a
            sign, new = _sort_sign((e,) + key)
            if sign == 0:
                continue
            terms[new] = terms[new] + dc * sign if new in terms else dc * sign
    return Form(form.n, terms)


def del_(form: Form) -> Form:
    """Holomorphic part of the exterior derivative."""
    return _d(form, False)


def delbar(form: Form) -> Form:
    return _d(form, True)


def J_act(form: Form, table: SignTable = SIGN_TABLE) -> Form:
    """Pull back along ``J`` covector by covector; ``(p, q)`` forms become ``(q, p)`` forms."""
    terms = {}
    for key, c in form.terms.items():
        coef, idx = 1, []
        for e in key:
            ce, ie = table.image(e, form.n)
            coef *= ce
            idx.append(ie)
        sign, new = _sort_sign(idx)
        if sign == 0:
            continue
        v = c * (coef * sign)
        terms[new] = terms[new] + v if new in terms else v
    return Form(form.n, terms)


def J_inv(form: Form, table: SignTable = SIGN_TABLE) -> Form:
    out = Form(form.n)
    unit = table.c1 * table.c2
    for deg in {len(k) for k in form.terms}:
        piece = Form(form.n, {k: v for k, v in form.terms.items() if len(k) == deg})
        out = out + J_act(piece, table) * (1.0 / unit**deg)
    return out


def del_J(form: Form, table: SignTable = SIGN_TABLE) -> Form:
    """``J^{-1} o delbar o J``."""
    return J_inv(delbar(J_act(form, table)), table)


def ddJ(f, table: SignTable = SIGN_TABLE) -> Form:
    """``del del_J f`` for a real polynomial field (or polynomial)."""
    return del_(del_J(Form.function(f), table))


def is_real(form: Form, table: SignTable = SIGN_TABLE, atol: float = 1e-12) -> bool:
    """Reality condition: conjugate of ``J`` applied to the form gives it back."""
    scale = max(1.0, form.max_abs_coeff())
    return (J_act(form, table).conj() - form).is_zero(atol * scale)


def theta_matrix(n: int) -> np.ndarray:
    """``theta = P dx`` with ``theta = (dw_0..dw_{2n-1}, conj dw_0..)``; shape ``(4n, 4n)``."""
    m = 2 * n
    p = np.zeros((2 * m, 4 * n), dtype=complex)
    for r in range(n):
        p[2 * r, 4 * r], p[2 * r, 4 * r + 1] = 1.0, 1j
        p[2 * r + 1, 4 * r + 2], p[2 * r + 1, 4 * r + 3] = 1.0, -1j
    p[m:] = p[:m].conj()
    return p


def right_action_matrix(n: int, unit) -> np.ndarray:
    """Real matrix of ``v -> v * unit`` on ``H^n``."""
    return np.kron(np.eye(n), right_matrix(np.asarray(unit, dtype=float)))


def _coefficient_matrix(form: Form) -> Polynomial:
    """Antisymmetric matrix polynomial ``C`` with ``form = sum_{k<l} C_kl theta_k ^ theta_l``."""
    if any(len(k) != 2 for k in form.terms):
        raise ValueError("a 2-form is required")
    d = 4 * form.n
    out = Polynomial.zero(form.nvars, (d, d), complex)
    for (k, l), c in form.terms.items():
        e = np.zeros((d, d), dtype=complex)
        e[k, l], e[l, k] = 1.0, -1.0
        out = out + c.map_coeffs(lambda v, e=e: v * e, (d, d), complex)
    return out


def real_bilinear(form: Form) -> Polynomial:
    """Matrix polynomial ``M`` with ``form(A, B) = A^T M B`` on real tangent vectors."""
    p = theta_matrix(form.n)
    return _coefficient_matrix(form).map_coeffs(lambda c: p.T @ c @ p)


def _from_real_bilinear(m: Polynomial, n: int) -> Form:
    """Inverse of :func:`real_bilinear` for an antisymmetric real-coordinate matrix."""
    pinv = np.linalg.inv(theta_matrix(n))
    nmat = m.map_coeffs(lambda c: pinv.T @ c @ pinv, dtype=complex)
    d = 4 * n
    terms = {}
    for k, l in itertools.combinations(range(d), 2):
        c = nmat.map_coeffs(lambda v, k=k, l=l: v[k, l] - v[l, k], ())
        if len(c):
            terms[(k, l)] = c
    return Form(n, terms)


def t_map_matrix(eta: Form, check: bool = True, atol: float = 1e-9) -> Polynomial:
    """Real symmetric matrix polynomial ``S`` of ``A -> eta(A, A o J)``.

    With ``check`` the blocks of ``S`` must be left-multiplication matrices
    of quaternions, which is what makes the result hyperhermitian.
    """
    n = eta.n
    rj = right_action_matrix(n, UNITS[2])
    m = real_bilinear(eta).map_coeffs(lambda c: c @ rj)
    s = m.map_coeffs(lambda c: 0.5 * (c + c.T))
    imag = max((float(np.max(np.abs(c.imag))) for c in s.terms.values()), default=0.0)
    scale = max(1.0, s.max_abs_coeff())
    if check and imag > atol * scale:
        raise ArithmeticError(f"t-map of a non-real form (imaginary part {imag:.3e})")
    s = s.map_coeffs(lambda c: c.real, dtype=float)
    if check:
        dev = max((_block_deviation(c, n) for c in s.terms.values()), default=0.0)
        if dev > atol * scale:
            raise ArithmeticError(f"t-map blocks are not quaternionic (deviation {dev:.3e}); sign table is inconsistent")
    return s


def _block_deviation(s: np.ndarray, n: int) -> float:
    from .quaternion import left_matrix

    dev = 0.0
    for r in range(n):
        for c in range(n):
            blk = s[4 * r : 4 * r + 4, 4 * c : 4 * c + 4]
            dev = max(dev, float(np.max(np.abs(blk - left_matrix(blk[:, 0])))))
    return dev


def _hyperhermitian_from_real(s_vals: np.ndarray, n: int) -> np.ndarray:
    """Quaternion matrix ``G`` from real block matrices ``S`` with blocks ``L(G_sr)``.

    ``A^T S A = Re sum conj(A_r) G_sr A_s``: the index order is the one used by
    ``hessian`` (entry ``(r, s)`` differentiates first in ``q_r``, then in ``conj q_s``).
    """
    blocks = s_vals.reshape(s_vals.shape[:-2] + (n, 4, n, 4))
    g = np.moveaxis(blocks[..., :, :, :, 0], -2, -1)
    return np.swapaxes(g, -2, -3)


def t_map(eta: Form, check: bool = True) -> HessianField:
    """Hyperhermitian-matrix field ``t(eta)`` of a real ``(2, 0)``-form."""
    s = t_map_matrix(eta, check)
    n = eta.n

    def func(points):
        pts = np.asarray(points, dtype=float).reshape(-1, 4 * n)
        return _hyperhermitian_from_real(s(pts), n)

    return HessianField(n, func=func)


def is_nonneg(eta: Form, samples, vectors, tol: float = 1e-9) -> bool:
    """``eta(Y, Y o J) >= -tol * scale`` at every sample point and vector."""
    n = eta.n
    m = real_bilinear(eta)
    rj = right_action_matrix(n, UNITS[2])
    pts = np.asarray(samples, dtype=float).reshape(-1, 4 * n)
    ys = np.asarray(vectors, dtype=float).reshape(-1, 4 * n)
    mv = m(pts)  # (P, d, d)
    vals = np.einsum("va,pab,bc,vc->pv", ys, mv, rj, ys)
    if np.max(np.abs(vals.imag), initial=0.0) > 1e-9 * max(1.0, np.max(np.abs(vals), initial=0.0)):
        raise ArithmeticError("form is not real")
    scale = max(1.0, float(np.max(np.abs(mv), initial=0.0))) * max(1.0, float(np.max(ys * ys, initial=0.0)))
    return bool(np.all(vals.real >= -tol * scale))


def select_sign_table(fields, samples, rtol: float = 1e-10) -> list[SignTable]:
    """Sign tables for which ``del del_J f`` is real and ``t(del del_J f) = Hessian / 4`` on all fields."""
    from .dirac import hessian

    good = []
    for c1, c2 in itertools.product((1, -1), repeat=2):
        table = SignTable(c1, c2)
        ok = True
        for f in fields:
            eta = ddJ(f, table)
            if not is_real(eta, table):
                ok = False
                break
            try:
                g = t_map(eta)(samples)
            except ArithmeticError:
                ok = False
                break
            h = hessian(f)(samples)
            if np.max(np.abs(g - 0.25 * h)) > rtol * max(1.0, np.max(np.abs(h))):
                ok = False
                break
        if ok:
            good.append(table)
    return good


@dataclass
class HKTReport:
    positive: bool
    closed: bool
    type_20: bool
    max_deviation: float
    strict: bool

    def __bool__(self):
        return self.closed and self.type_20 and (self.positive or not self.strict)


def hkt_flat_check(f, strict: bool = True, samples=None, table: SignTable = SIGN_TABLE, atol: float = 1e-9) -> HKTReport:
    """Check that ``g = t(del del_J f)`` is an HKT metric on flat space.

    ``positive``: ``g`` is positive definite at every sample.  ``type_20``
    and ``closed``: ``Omega = omega_J - i omega_K`` with
    ``omega_L(A, B) = g(A, B o L)`` is a ``(2, 0)``-form with
    ``del Omega = 0``, checked coefficient by coefficient.
    """
    if isinstance(f, Polynomial):
        f = PolyField(f, f.nvars // 4)
    n = f.n
    eta = ddJ(f, table)
    s = t_map_matrix(eta)
    if samples is None:
        samples = np.random.default_rng(0).standard_normal((20, 4 * n))
    g = _hyperhermitian_from_real(s(np.asarray(samples, dtype=float).reshape(-1, 4 * n)), n)
    positive = all(is_positive_definite(m) for m in g)
    rj = right_action_matrix(n, UNITS[2])
    rk = right_action_matrix(n, UNITS[3])
    om_j = s.map_coeffs(lambda c: c @ rj)
    om_k = s.map_coeffs(lambda c: c @ rk)
    omega = om_j.astype(complex) - om_k.astype(complex) * 1j
    omega_form = _from_real_bilinear(omega, n)
    scale = max(1.0, omega_form.max_abs_coeff())
    wrong = sum((omega_form.part(p, q) for p, q in ((1, 1), (0, 2))), Form(n))
    dev_type = wrong.max_abs_coeff()
    dev_closed = del_(omega_form).max_abs_coeff()
    return HKTReport(
        positive=bool(positive),
        closed=dev_closed <= atol * scale,
        type_20=dev_type <= atol * scale,
        max_deviation=max(dev_type, dev_closed),
        strict=strict,
    )
