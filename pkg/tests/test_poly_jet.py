import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from quatpsh import jet
from quatpsh.poly import Polynomial


def random_poly(rng, nvars=3, nterms=6, degree=3):
    terms = {}
    for _ in range(nterms):
        e = tuple(rng.integers(0, degree + 1, nvars))
        terms[e] = terms.get(e, 0.0) + float(rng.integers(-3, 4))
    return Polynomial(nvars, terms)


def test_arithmetic_matches_evaluation(rng):
    p, q = random_poly(rng), random_poly(rng)
    x = rng.standard_normal((7, 3))
    assert np.allclose((p + q)(x), p(x) + q(x))
    assert np.allclose((p * q)(x), p(x) * q(x))
    assert np.allclose((p - 2.0)(x), p(x) - 2.0)
    assert np.allclose((p**3)(x), p(x) ** 3)


def test_diff_against_finite_differences(rng):
    p = random_poly(rng)
    x = rng.standard_normal((5, 3))
    eps = 1e-6
    for v in range(3):
        e = np.eye(3)[v] * eps
        fd = (p(x + e) - p(x - e)) / (2 * eps)
        assert np.allclose(p.diff(v)(x), fd, rtol=1e-6, atol=1e-5)


@given(st.integers(0, 4), st.integers(0, 4))
def test_mixed_partials_commute(a, b):
    p = random_poly(np.random.default_rng(a * 5 + b))
    assert (p.diff(0).diff(1) - p.diff(1).diff(0)).is_zero()


def test_compose_linear(rng):
    p = random_poly(rng)
    m = rng.standard_normal((3, 3))
    x = rng.standard_normal((4, 3))
    assert np.allclose(p.compose_linear(m)(x), p(x @ m.T))


def test_matrix_coefficients(rng):
    m = np.array([[1.0, 2.0], [3.0, 4.0]])
    p = Polynomial.variable(2, 0).map_coeffs(lambda c: c * m, (2, 2))
    vals = p(np.array([[2.0, 5.0]]))
    assert vals.shape == (1, 2, 2)
    assert np.allclose(vals[0], [[2, 4], [6, 8]])


def test_zero_and_constant():
    z = Polynomial.zero(2)
    assert z.is_zero() and len(z) == 0
    c = Polynomial.constant(2, 3.0)
    assert np.allclose(c(np.zeros((3, 2))), 3.0)
    with pytest.raises(ValueError):
        Polynomial.zero(2) + Polynomial.zero(3)


def test_jet_hessian_matches_polynomial(rng):
    p = random_poly(rng, nvars=4, degree=4)
    x = rng.standard_normal((6, 4))
    j = p.evaluate_generic(jet.seed(x))
    assert np.allclose(j.val, p(x))
    for a in range(4):
        assert np.allclose(j.grad[:, a], p.diff(a)(x))
        for b in range(4):
            assert np.allclose(j.hess[:, a, b], p.diff(a).diff(b)(x), rtol=1e-10, atol=1e-9)


def test_jet_elementary_functions(rng):
    x = rng.uniform(0.5, 1.5, (5, 2))
    c = jet.seed(x)
    f = jet.exp(c[0]) * jet.sin(c[1]) + jet.log(c[0]) / c[1] + jet.sqrt(c[0] * c[1]) - jet.tanh(c[1]) ** 2
    eps = 1e-4

    def g(y):
        return np.exp(y[:, 0]) * np.sin(y[:, 1]) + np.log(y[:, 0]) / y[:, 1] + np.sqrt(y[:, 0] * y[:, 1]) - np.tanh(y[:, 1]) ** 2

    for a in range(2):
        for b in range(2):
            ea, eb = np.eye(2)[a] * eps, np.eye(2)[b] * eps
            fd = (g(x + ea + eb) - g(x + ea - eb) - g(x - ea + eb) + g(x - ea - eb)) / (4 * eps**2)
            assert np.allclose(f.hess[:, a, b], fd, rtol=1e-5, atol=1e-5)
