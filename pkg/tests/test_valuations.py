import numpy as np
import pytest
from scipy.special import gamma

from quatpsh import jet
from quatpsh.convex import Ball, Box, Embedded, HalfBall, Polytope
from quatpsh.valuations import (
    GridSpec,
    ValuationSpec,
    kernel_hessian,
    mollified_hessian,
    valuation,
    valuation_identity_residual,
    valuation_integrand,
)


def kernel_via_jets(z, delta):
    d = z.shape[1]
    c = gamma(d / 2 + 4) / (6 * np.pi ** (d / 2) * delta**d)
    x = jet.seed(z)
    s = sum(xi * xi for xi in x) * (1 / delta**2)
    return (((1 - s) ** 3) * c).hess


def test_kernel_hessian_matches_jets(rng):
    for d in (4, 8):
        z = rng.uniform(-0.1, 0.1, (50, d))
        z = z[np.linalg.norm(z, axis=1) < 0.2]
        ref = kernel_via_jets(z, 0.2)
        got = kernel_hessian(z, 0.2)
        assert np.max(np.abs(got - ref)) <= 1e-12 * np.max(np.abs(ref))


def test_kernel_vanishes_outside():
    z = np.array([[0.3, 0, 0, 0]])
    assert np.all(kernel_hessian(z, 0.2) == 0)


def test_mollified_hessian_of_smooth_support():
    # a ball's support function r|y| is smooth away from 0; compare with its exact Hessian
    ball = Ball(np.zeros(4), 1.0)
    spec = ValuationSpec(n=1, k=1, inner_nodes=20000, delta=0.05)
    _, inner = spec.nodes(0)
    y = np.array([[1.0, 0.5, -0.3, 0.2]])
    got = mollified_hessian(ball, y, spec.delta, inner)[0]
    r = np.linalg.norm(y)
    exact = (np.eye(4) - np.outer(y[0], y[0]) / r**2) / r
    assert np.max(np.abs(got - exact)) < 0.05 * np.max(np.abs(exact))


def test_spec_validation():
    with pytest.raises(ValueError):
        ValuationSpec(n=1, k=2)
    with pytest.raises(ValueError):
        ValuationSpec(n=2, k=1)
    with pytest.raises(ValueError):
        ValuationSpec(n=1, k=1, support_inner=0.2)
    with pytest.raises(ValueError):
        ValuationSpec(n=1, k=1, backend="mc")
    with pytest.raises(ValueError):
        valuation(Box.cube(8), ValuationSpec(n=1, k=1))


def small_spec(**kw):
    kw.setdefault("n_samples", 2048)
    kw.setdefault("replicates", 4)
    return ValuationSpec(n=1, k=1, **kw)


def test_translation_invariance_exact(rng):
    body = Polytope(rng.standard_normal((6, 4)))
    spec = small_spec()
    a = valuation_integrand(body, spec)[2]
    b = valuation_integrand(body.translate(rng.standard_normal(4) * 3), spec)[2]
    assert np.max(np.abs(a - b)) <= 1e-12


def test_homogeneity_degree_k(rng):
    body = Polytope(rng.standard_normal((6, 4)))
    spec = small_spec()
    base = valuation(body, spec)
    for lam in (0.5, 2.0):
        scaled = valuation(body.scale(lam), spec)
        assert abs(scaled.value - lam * base.value) <= 1e-10 * abs(base.value)


def test_two_variable_homogeneity(rng):
    body = Box.cube(8, 0.5)
    spec = ValuationSpec(n=2, k=2, n_samples=512, replicates=2, inner_nodes=32)
    base = valuation(body, spec).value
    assert np.isclose(valuation(body.scale(2.0), spec).value, 4.0 * base, rtol=1e-10)


def test_positive_on_bodies(rng):
    spec = small_spec()
    for body in (Box.cube(4, 0.5), Ball(np.zeros(4), 0.5)):
        r = valuation(body, spec)
        assert r.value > 0 and r.stderr < 0.05 * r.value


def test_nested_identity_is_zero():
    k1 = Ball(np.zeros(4), 0.5)
    k2 = Ball(np.zeros(4), 0.8)
    res = valuation_identity_residual(k1, k2, small_spec())
    assert res.value == 0.0


def test_grid_backend():
    spec = ValuationSpec(n=1, k=1, backend="grid", grid=GridSpec(cells=16), delta=0.1,
                         support_inner=0.1, support_outer=0.22, exclusion_radius=0.05)
    r = valuation(Box.cube(4, 0.5), spec)
    assert r.stderr == 0.0 and r.value > 0
    r2 = valuation(Box.cube(4, 0.5).scale(2.0), spec)
    assert np.isclose(r2.value, 2.0 * r.value, rtol=1e-10)
