import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from quatpsh.hyperherm import (
    HMatrix,
    NotHyperhermitianError,
    aleksandrov_gap,
    conj_transform,
    diagonalize,
    hyperhermitian_basis,
    is_nonneg_definite,
    is_positive_definite,
    mixed_discriminant,
    moore_det,
    moore_det_magnitude_oracle,
    real_embedding,
    signature_of_B,
)
from quatpsh.quaternion import qconj_transpose, qmatmul

from strategies import hyperhermitian


def complex_to_quaternionic(h):
    """Complex matrix ``X + iY`` as the quaternionic matrix with ``t = X``, ``x = Y``."""
    a = np.zeros(h.shape + (4,))
    a[..., 0], a[..., 1] = h.real, h.imag
    return a


def random_hermitian(n, rng):
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return z + z.conj().T


# -- determinant --------------------------------------------------------------


@given(hyperhermitian())
def test_fourth_power_is_real_determinant(a):
    det = moore_det(a)
    real = np.linalg.det(real_embedding(a))
    assert abs(det**4 - real) <= 1e-8 * max(1.0, abs(real))


def test_small_cases_closed_form(rng):
    assert moore_det(np.array([[[2.5, 0, 0, 0]]])) == 2.5
    a, b = 5.0, 1.0
    q = np.array([1.0, 1.0, 1.0, 1.0])
    m = np.array([[[a, 0, 0, 0], q], [q * [1, -1, -1, -1], [b, 0, 0, 0]]])
    assert moore_det(m) == a * b - q @ q
    d = rng.standard_normal(4)
    assert np.isclose(moore_det(HMatrix.real_diag(d)), np.prod(d))
    assert moore_det(HMatrix.identity(3)) == 1.0


def test_complex_hermitian_matches_classical_determinant(rng):
    for n in range(1, 5):
        for _ in range(10):
            h = random_hermitian(n, rng)
            ref = np.linalg.det(h).real
            assert np.isclose(moore_det(complex_to_quaternionic(h)), ref, rtol=1e-10, atol=1e-12)


def test_magnitude_oracle(rng):
    for n in (2, 3):
        a = HMatrix.random(n, rng)
        assert np.isclose(moore_det_magnitude_oracle(a), abs(moore_det(a)), rtol=1e-8)


@pytest.mark.parametrize("n", [2, 3])
def test_congruence(rng, n):
    for _ in range(10):
        a = HMatrix.random(n, rng)
        c = rng.standard_normal((n, n, 4))
        lhs = moore_det(conj_transform(a, c))
        rhs = moore_det(a) * moore_det(qmatmul(qconj_transpose(c), c))
        assert np.isclose(lhs, rhs, rtol=1e-9, atol=1e-9 * abs(rhs))


def test_eigenvalue_product(rng):
    for n in (2, 3, 4):
        a = HMatrix.random(n, rng)
        lam, u = diagonalize(a)
        assert np.isclose(moore_det(a), np.prod(lam), rtol=1e-8)
        d = np.zeros((n, n, 4))
        d[np.arange(n), np.arange(n), 0] = lam
        assert np.allclose(qmatmul(qmatmul(u, d), qconj_transpose(u)), a.entries, atol=1e-8)


def test_stacked_evaluation(rng):
    mats = np.stack([HMatrix.random(3, rng).entries for _ in range(5)])
    assert np.allclose(moore_det(mats), [moore_det(m) for m in mats])


def test_rejects_non_hyperhermitian():
    bad = np.zeros((2, 2, 4))
    bad[0, 1, 0] = 1.0
    with pytest.raises(NotHyperhermitianError):
        moore_det(bad)
    with pytest.raises(NotHyperhermitianError):
        HMatrix(bad)


def test_json_round_trip(rng):
    a = HMatrix.random(3, rng, integer=3)
    b = HMatrix.from_json(a.to_json())
    assert np.array_equal(a.entries, b.entries)
    with pytest.raises(ValueError):
        HMatrix.from_json('{"n": 3, "entries": [[[1, 0, 0, 0]]]}')


# -- positivity ---------------------------------------------------------------


@given(hyperhermitian())
def test_sylvester_matches_eigenvalues(a):
    lam = np.linalg.eigvalsh(real_embedding(a))[0]
    oracle = lam > 1e-9 * (1 + np.abs(a).max())
    assert is_positive_definite(a) == oracle


def test_positive_definite_examples(rng):
    assert is_positive_definite(HMatrix.random_pd(4, rng))
    assert not is_positive_definite(HMatrix.real_diag([1.0, 0.0]))
    assert is_nonneg_definite(HMatrix.real_diag([1.0, 0.0]))
    assert not is_nonneg_definite(HMatrix.real_diag([1.0, -1e-3]))


# -- mixed discriminants -------------------------------------------------------


def coefficient_oracle(mats):
    """``n! D(A_1..A_n)`` is the coefficient of ``l_1 ... l_n`` in ``det(sum l_i A_i)``.

    Fitted by least squares on all degree-``n`` monomials.
    """
    n = len(mats)
    monos = [m for m in itertools.product(range(n + 1), repeat=n) if sum(m) == n]
    lam = np.random.default_rng(7).uniform(-1, 1, (4 * len(monos), n))
    vals = np.array([moore_det(np.tensordot(l, np.array(mats), axes=(0, 0))) for l in lam])
    design = np.array([[np.prod(l ** np.array(m)) for m in monos] for l in lam])
    coef = np.linalg.lstsq(design, vals, rcond=None)[0]
    return coef[monos.index((1,) * n)] / math.factorial(n)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_mixed_discriminant_coefficient_oracle(rng, n):
    for _ in range(3):
        mats = [HMatrix.random(n, rng).entries for _ in range(n)]
        assert np.isclose(mixed_discriminant(mats), coefficient_oracle(mats), rtol=1e-8, atol=1e-8)


@given(st.lists(hyperhermitian(n=3), min_size=3, max_size=3), st.permutations(range(3)))
def test_mixed_discriminant_symmetric_and_diagonal(mats, perm):
    val = mixed_discriminant(mats)
    assert np.isclose(mixed_discriminant([mats[i] for i in perm]), val, atol=1e-9)
    assert np.isclose(mixed_discriminant([mats[0]] * 3), moore_det(mats[0]), atol=1e-9)


def test_mixed_discriminant_multilinear(rng):
    a, b, c, x = (HMatrix.random(3, rng).entries for _ in range(4))
    lhs = mixed_discriminant([a + 2.0 * x, b, c])
    rhs = mixed_discriminant([a, b, c]) + 2.0 * mixed_discriminant([x, b, c])
    assert np.isclose(lhs, rhs, rtol=1e-10)


def test_mixed_discriminant_positive_on_pd(rng):
    mats = [HMatrix.random_pd(3, rng) for _ in range(3)]
    assert mixed_discriminant(mats) > 0


def test_mixed_discriminant_wrong_count(rng):
    with pytest.raises(ValueError):
        mixed_discriminant([HMatrix.random(3, rng)] * 2)


# -- Aleksandrov and signature --------------------------------------------------


def test_aleksandrov_gap(rng):
    for _ in range(20):
        pds = [HMatrix.random_pd(3, rng).entries for _ in range(2)]
        x = HMatrix.random(3, rng).entries
        scale = max(1.0, max(np.abs(m).max() for m in pds + [x]) ** 6)
        assert aleksandrov_gap(pds, x) >= -1e-9 * scale
        assert abs(aleksandrov_gap(pds, 2.5 * pds[-1])) <= 1e-9 * scale


def test_aleksandrov_requires_positive_definite(rng):
    with pytest.raises(ValueError):
        aleksandrov_gap([HMatrix.real_diag([1, -1, 1]).entries] * 2, HMatrix.identity(3).entries)


def test_basis_dimension():
    for n in (1, 2, 3):
        b = hyperhermitian_basis(n)
        assert len(b) == n * (2 * n - 1)
        assert np.linalg.matrix_rank(b.reshape(len(b), -1)) == len(b)


@pytest.mark.parametrize("n,expected", [(2, (1, 5, 0)), (3, (1, 14, 0))])
def test_signature(rng, n, expected):
    for _ in range(3):
        pds = [HMatrix.random_pd(n, rng).entries for _ in range(n - 2)]
        assert signature_of_B(pds, n=n) == expected
