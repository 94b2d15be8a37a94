"""Acceptance criteria 1-13, one test each, every test records a PASS/FAIL line."""

import time

import numpy as np
import pytest

from quatpsh.cli import blocki_pair, blocki_weight, run
from quatpsh.convex import Embedded, HalfBall, Polytope
from quatpsh.dirac import check_transformation, commutator_deviation, d, dbar, hessian
from quatpsh.dirichlet import BUILTIN_CASES, error_table, solve_n1
from quatpsh.fields import PolyField, norm_sq_field
from quatpsh.hypercomplex import Form, ddJ, del_, del_J, hkt_flat_check, is_real, t_map
from quatpsh.hyperherm import (
    HMatrix,
    aleksandrov_gap,
    conj_transform,
    is_positive_definite,
    moore_det,
    real_embedding,
    signature_of_B,
)
from quatpsh.poly import Polynomial
from quatpsh.psh import blocki_residual, radial_bump, weak_convergence_slope
from quatpsh.qmc import box_points
from quatpsh.quaternion import qconj_transpose, qmatmul
from quatpsh.valuations import GridSpec, ValuationSpec, valuation, valuation_identity_residual, valuation_integrand


def strictly_psh(n, rng, terms=3):
    d = 4 * n
    p = norm_sq_field(n).real_part()
    for _ in range(terms):
        lin = sum((Polynomial.variable(d, i) * float(rng.standard_normal()) for i in range(d)), Polynomial.zero(d))
        p = p + lin**4 * 0.2
    return PolyField(p, n)


def test_criterion_01_moore_oracle(record):
    rng = np.random.default_rng(1)
    start = time.perf_counter()
    worst = 0.0
    for i in range(200):
        a = HMatrix.random(1 + i % 4, rng, integer=3)
        real = np.linalg.det(real_embedding(a))
        worst = max(worst, abs(moore_det(a) ** 4 - real) / max(1.0, abs(real)))
    elapsed = time.perf_counter() - start
    record(1, worst <= 1e-8 and elapsed < 10.0, f"max rel |P^4 - det R| = {worst:.2e} (<= 1e-8), {elapsed:.2f} s (< 10 s)")


def test_criterion_02_congruence(record):
    rng = np.random.default_rng(2)
    worst = 0.0
    for i in range(100):
        n = 2 + i % 2
        a = HMatrix.random(n, rng)
        c = rng.standard_normal((n, n, 4))
        lhs = moore_det(conj_transform(a, c))
        rhs = moore_det(a) * moore_det(qmatmul(qconj_transpose(c), c))
        worst = max(worst, abs(lhs - rhs) / max(abs(rhs), 1e-300))
    record(2, worst <= 1e-9, f"max rel deviation {worst:.2e} (<= 1e-9) over 100 pairs")


def test_criterion_03_complex_embedding(record):
    rng = np.random.default_rng(3)
    worst = 0.0
    for i in range(100):
        n = 1 + i % 4
        z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        h = z + z.conj().T
        a = np.zeros((n, n, 4))
        a[..., 0], a[..., 1] = h.real, h.imag
        ref = np.linalg.det(h).real
        worst = max(worst, abs(moore_det(a) - ref) / max(abs(ref), 1e-300))
    record(3, worst <= 1e-10, f"max rel deviation from complex det {worst:.2e} (<= 1e-10)")


def test_criterion_04_sylvester(record):
    rng = np.random.default_rng(4)
    disagree = 0
    positives = 0
    for i in range(200):
        n = 1 + i % 4
        # mix random integer matrices with shifted ones so both verdicts occur
        a = HMatrix.random(n, rng, integer=3)
        if i % 2:
            a = HMatrix(a.entries + 3 * n * HMatrix.identity(n).entries)
        lam = np.linalg.eigvalsh(real_embedding(a))[0]
        oracle = lam > 1e-9 * (1 + np.abs(a.entries).max())
        positives += oracle
        disagree += is_positive_definite(a) != oracle
    record(4, disagree == 0, f"{disagree} disagreements on 200 matrices ({positives} positive definite)")


def test_criterion_05_aleksandrov(record):
    rng = np.random.default_rng(5)
    worst_gap, worst_eq = 0.0, 0.0
    for _ in range(100):
        pds = [HMatrix.random_pd(3, rng).entries for _ in range(2)]
        x = HMatrix.random(3, rng).entries
        scale = max(1.0, max(np.abs(m).max() for m in pds + [x]) ** 3) ** 2
        worst_gap = min(worst_gap, aleksandrov_gap(pds, x) / scale)
        eq = aleksandrov_gap(pds, rng.uniform(-3, 3) * pds[-1])
        scale_eq = max(1.0, (3 * np.abs(pds).max()) ** 3) ** 2
        worst_eq = max(worst_eq, abs(eq) / scale_eq)
    ok = worst_gap >= -1e-9 and worst_eq <= 1e-9
    record(5, ok, f"min gap/scale {worst_gap:.2e} (>= -1e-9); equality case max |gap|/scale {worst_eq:.2e} (<= 1e-9)")


def test_criterion_06_signature(record):
    rng = np.random.default_rng(6)
    bad = []
    for n, expected in ((2, (1, 5, 0)), (3, (1, 14, 0))):
        for _ in range(20):
            pds = [HMatrix.random_pd(n, rng).entries for _ in range(n - 2)]
            sig = signature_of_B(pds, n=n)
            if sig != expected:
                bad.append((n, sig))
    record(6, not bad, f"signatures (1,5,0) and (1,14,0) on 40 tuples; mismatches {bad}")


def test_criterion_07_dirac(record):
    rng = np.random.default_rng(7)
    worst_c = 0.0
    fields = [PolyField.random(2, 4, rng) for _ in range(50)]
    for f in fields:
        pts = rng.standard_normal((10, 8))
        for i in range(2):
            for j in range(2):
                scale = max(1.0, np.abs(d(dbar(f, j), i).poly(pts)).max())
                worst_c = max(worst_c, commutator_deviation(f, i, j, pts) / scale)
    worst_t = 0.0
    for k in range(20):
        f = fields[k]
        a = rng.standard_normal((2, 2, 4))
        worst_t = max(worst_t, check_transformation(f, a, rng.standard_normal((10, 8))))
    ok = worst_c <= 1e-10 and worst_t <= 1e-8
    record(7, ok, f"commutator {worst_c:.2e} x scale (<= 1e-10); transformation law {worst_t:.2e} (<= 1e-8)")


def test_criterion_08_weak_convergence(record):
    rng = np.random.default_rng(8)
    u = strictly_psh(2, rng)
    pts = box_points(2**14, -np.ones(8), np.ones(8), seed=8)
    errs, slope = weak_convergence_slope(u, radial_bump(0.0, 1.0), [4, 8, 16], pts, 2.0**8)
    ok = abs(slope + 1.0) <= 0.2 and bool(np.all(np.diff(errs) < 0))
    record(8, ok, f"errors {np.array2string(errs, precision=4)} at N = 4, 8, 16; slope {slope:.3f} (within 20% of -1)")


@pytest.mark.slow
def test_criterion_09_blocki(record):
    start = time.perf_counter()
    f, g = blocki_pair("half-disks", 32)
    assert f.shape == (33, 33, 33, 33)
    psi = blocki_weight()
    res = [blocki_residual(f, g, None, psi, dl) for dl in (0.2, 0.1, 0.05)]
    elapsed = time.perf_counter() - start
    fn, gn = blocki_pair("nested", 32)
    nested = blocki_residual(fn, gn, None, psi, 0.1)
    ok = nested == 0.0 and res[0] > res[1] > res[2] and res[2] < 0.25 * res[0] and elapsed < 120
    record(
        9,
        ok,
        f"nested {nested}; residuals {res[0]:.3e} > {res[1]:.3e} > {res[2]:.3e}, "
        f"final/first {res[2] / res[0]:.3f} (< 0.25), {elapsed:.0f} s on 33^4 (< 120 s)",
    )


def test_criterion_10_dirichlet(record):
    hs = [1 / 8, 1 / 12, 1 / 16]
    quad = error_table("norm-sq", hs)
    quartic = error_table("norm-quartic", hs)
    order = np.polyfit(np.log(hs), np.log([r[1] for r in quartic]), 1)[0]
    harmonic_ok = all(r[1] <= h**2 for case in ("harmonic-t", "harmonic-quadratic") for h, r in zip(hs, error_table(case, hs)))
    f, phi, _ = BUILTIN_CASES["norm-quartic"]
    a = solve_n1(f, phi, 1 / 12, x0="zero").interior_values()
    b = solve_n1(f, phi, 1 / 12, x0="random").interior_values()
    start_dev = float(np.max(np.abs(a - b)))
    quad_err = max(r[1] for r in quad)
    ok = quad_err <= 1e-9 and order >= 1.9 and harmonic_ok and start_dev <= 1e-9
    record(
        10,
        ok,
        f"|q|^2 sup error {quad_err:.1e}; order on |q|^4 {order:.2f} (>= 1.9); harmonic within h^2: {harmonic_ok}; "
        f"initial iterates differ by {start_dev:.1e}",
    )


@pytest.mark.slow
def test_criterion_11_valuations(record):
    rng = np.random.default_rng(11)
    spec = ValuationSpec(n=1, k=1, n_samples=2**14, seed=11)
    bodies = [Polytope(rng.standard_normal((6, 4)) * 0.7) for _ in range(10)]
    trans = 0.0
    homog = 0.0
    for body in bodies:
        base = valuation_integrand(body, spec)[2]
        moved = valuation_integrand(body.translate(rng.standard_normal(4) * 2), spec)[2]
        trans = max(trans, float(np.max(np.abs(moved - base))))
        v = valuation(body, spec)
        for lam in (0.5, 2.0):
            w = valuation(body.scale(lam), spec)
            pooled = np.hypot(w.stderr, lam * v.stderr)
            homog = max(homog, abs(w.value - lam * v.value) / pooled)
    k1 = Embedded(HalfBall([0.0, 0.0], 1.0, [1.0, 0.0]), (0, 4), 8)
    k2 = Embedded(HalfBall([0.0, 0.0], 1.0, [-1.0, 0.0]), (0, 4), 8)
    ident = []
    for dl in (0.2, 0.1, 0.05):
        gspec = ValuationSpec(
            n=2, k=2, psi0=blocki_weight(), support_inner=0.1, support_outer=0.25, exclusion_radius=0.05,
            delta=dl, backend="grid", grid=GridSpec(axes=(0, 1, 4, 5), half_width=0.4, cells=32),
        )
        ident.append(valuation_identity_residual(k1, k2, gspec).value)
    ok = trans <= 1e-12 and homog <= 2.0 and ident[0] > ident[1] > ident[2]
    record(
        11,
        ok,
        f"translation {trans:.1e} (<= 1e-12); homogeneity max |diff|/pooled SE {homog:.2e} (<= 2); "
        f"identity residuals {ident[0]:.3e} > {ident[1]:.3e} > {ident[2]:.3e}",
    )


def test_criterion_12_hypercomplex(record):
    rng = np.random.default_rng(12)
    worst = {"del2": 0.0, "anti": 0.0, "quarter": 0.0}
    real_ok = True
    for n in (1, 2):
        for _ in range(20):
            f = PolyField.random(n, 4, rng)
            zero = Form.function(f)
            worst["del2"] = max(worst["del2"], del_(del_(zero)).max_abs_coeff())
            eta = ddJ(f)
            worst["anti"] = max(worst["anti"], (eta + del_J(del_(zero))).max_abs_coeff())
            real_ok &= is_real(eta)
            pts = rng.standard_normal((50, 4 * n))
            h = hessian(f)(pts)
            dev = np.max(np.abs(t_map(eta)(pts) - 0.25 * h)) / max(1.0, np.abs(h).max())
            worst["quarter"] = max(worst["quarter"], dev)
    hkt_ok = all(bool(hkt_flat_check(strictly_psh(n, rng), strict=True)) for n in (1, 2) for _ in range(5))
    hkt_ok &= all(bool(hkt_flat_check(norm_sq_field(n))) for n in (1, 2))
    ok = worst["del2"] == 0.0 and worst["anti"] == 0.0 and real_ok and worst["quarter"] <= 1e-10 and hkt_ok
    record(
        12,
        ok,
        f"del^2 {worst['del2']:.1e}, anticommutator {worst['anti']:.1e} (exact), reality {real_ok}, "
        f"quarter identity {worst['quarter']:.1e} (<= 1e-10), HKT checks {hkt_ok}",
    )


DETERMINISM_ARGS = {
    "moore-det": [],
    "mixed-disc": [],
    "sylvester": [],
    "aleksandrov": ["--count", "20"],
    "signature": ["--count", "3"],
    "dirac-check": ["--count", "3"],
    "psh-check": ["--count", "3"],
    "ma-measure": ["--cells", "16", "--deltas", "0.3,0.2"],
    "blocki": ["--cells", "16", "--deltas", "0.2,0.1"],
    "dirichlet": ["--case", "norm-quartic", "--h", "1/6", "--x0", "random"],
    "valuation": ["--samples", "4096", "--replicates", "4"],
    "hkt-check": ["--count", "2"],
}


def test_criterion_13_determinism(record, tmp_path):
    differing = []
    for command, extra in DETERMINISM_ARGS.items():
        outputs = []
        for i in range(2):
            out = tmp_path / f"{command}-{i}.csv"
            code = run([command, "--seed", "12345", "--out", str(out)] + extra)
            assert code == 0, (command, code)
            outputs.append(out.read_bytes())
        if outputs[0] != outputs[1]:
            differing.append(command)
    record(13, not differing, f"{len(DETERMINISM_ARGS)} subcommands run twice; byte differences in {differing}")
