"""Command-line experiment runner.

Every subcommand writes CSV rows (17 significant digits) and a JSON summary
with the echoed inputs, the seed, maximum deviations and a pass/fail flag per
invariant.  With ``--out PATH`` the CSV goes to ``PATH`` and the summary to
``PATH`` with suffix ``.json``; otherwise the CSV goes to stdout and the
summary to stderr.

Exit status: 0 success, 2 unparsable input, 3 violated precondition,
4 solver non-convergence, 5 failed invariant.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np
from threadpoolctl import threadpool_limits

from . import convex, dirichlet, hypercomplex, hyperherm, psh, valuations
from .dirac import check_transformation, commutator_deviation, hessian
from .fields import GridField, PolyField, norm_sq_field
from .poly import Polynomial

EXIT_OK, EXIT_PARSE, EXIT_PRECONDITION, EXIT_NONCONVERGENCE, EXIT_INVARIANT = 0, 2, 3, 4, 5


class InputError(Exception):
    """Malformed input file or config (exit status 2)."""


@dataclass
class Outcome:
    header: list
    rows: list = field(default_factory=list)
    deviations: dict = field(default_factory=dict)
    invariants: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.invariants.values())


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def render_csv(outcome: Outcome) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(outcome.header)
    for row in outcome.rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else repr(v)
    return v


# -- input helpers -----------------------------------------------------------


def _read_json(path) -> dict:
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(f"input file {path} does not exist")
    try:
        return json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: {exc}") from exc


def _load_matrix(path) -> hyperherm.HMatrix:
    obj = _read_json(path)
    try:
        entries = np.asarray(obj["entries"], dtype=float)
        n = int(obj["n"])
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{path}: expected {{'n', 'entries'}}") from exc
    if entries.shape != (n, n, 4):
        raise InputError(f"{path}: entries shape {entries.shape} does not match n={n}")
    return hyperherm.HMatrix(entries)


def _load_field(path) -> PolyField:
    obj = _read_json(path)
    try:
        return PolyField.from_terms(int(obj["n"]), obj["terms"])
    except (KeyError, TypeError) as exc:
        raise InputError(f"{path}: expected {{'n', 'terms'}}") from exc


def _load_body(path) -> convex.ConvexBody:
    obj = _read_json(path)
    try:
        return convex.body_from_dict(obj)
    except (KeyError, TypeError) as exc:
        raise InputError(f"{path}: malformed body") from exc


def _parse_floats(text: str) -> list[float]:
    try:
        return [float(Fraction(t.strip())) for t in str(text).split(",") if t.strip()]
    except (ValueError, ZeroDivisionError) as exc:
        raise InputError(f"cannot parse number list {text!r}") from exc


def _random_matrices(args, rng):
    return [(f"random[{i}]", hyperherm.HMatrix.random(args.n, rng, integer=args.integer)) for i in range(args.count)]


def _matrices(args, rng):
    if args.inputs:
        return [(str(p), _load_matrix(p)) for p in args.inputs]
    return _random_matrices(args, rng)


def _strictly_psh_poly(n: int, rng, terms: int = 3) -> PolyField:
    """``|q|^2`` plus fourth powers of random linear forms (convex, hence psh)."""
    d = 4 * n
    p = norm_sq_field(n).real_part()
    for _ in range(terms):
        lin = Polynomial(d, {tuple(int(a == b) for b in range(d)): float(c) for a, c in enumerate(rng.standard_normal(d))})
        p = p + lin**4 * 0.25
    return PolyField(p, n)


# -- subcommands -------------------------------------------------------------


def cmd_moore_det(args, rng) -> Outcome:
    out = Outcome(["source", "n", "moore_det", "real_det", "rel_deviation"])
    worst = 0.0
    for src, a in _matrices(args, rng):
        det = float(hyperherm.moore_det(a))
        real = float(np.linalg.det(hyperherm.real_embedding(a)))
        dev = abs(det**4 - real) / max(1.0, abs(real))
        worst = max(worst, dev)
        out.rows.append((src, a.n, det, real, dev))
    out.deviations["fourth_power"] = worst
    out.invariants["fourth_power_matches_real_det"] = worst <= 1e-8
    return out


def cmd_mixed_disc(args, rng) -> Outcome:
    out = Outcome(["source", "n", "mixed_disc", "permutation_dev", "diagonal_dev"])
    if args.inputs:
        mats = [_load_matrix(p).entries for p in args.inputs]
        groups = [(",".join(args.inputs), mats)]
    else:
        groups = [
            (f"random[{i}]", [hyperherm.HMatrix.random(args.n, rng, integer=args.integer).entries for _ in range(args.n)])
            for i in range(args.count)
        ]
    perm_dev = diag_dev = 0.0
    for src, mats in groups:
        n = mats[0].shape[0]
        val = float(hyperherm.mixed_discriminant(mats))
        perm = rng.permutation(len(mats))
        scale = max(1.0, max(float(np.max(np.abs(m))) for m in mats) ** n)
        pd = abs(float(hyperherm.mixed_discriminant([mats[i] for i in perm])) - val) / scale
        dd = abs(float(hyperherm.mixed_discriminant([mats[0]] * n)) - float(hyperherm.moore_det(mats[0]))) / scale
        perm_dev, diag_dev = max(perm_dev, pd), max(diag_dev, dd)
        out.rows.append((src, n, val, pd, dd))
    out.deviations.update(permutation=perm_dev, diagonal=diag_dev)
    out.invariants["symmetric"] = perm_dev <= 1e-10
    out.invariants["diagonal_is_moore_det"] = diag_dev <= 1e-10
    return out


def cmd_sylvester(args, rng) -> Outcome:
    out = Outcome(["source", "n", "sylvester", "min_eig", "agree"])
    disagree = 0
    for src, a in _matrices(args, rng):
        syl = hyperherm.is_positive_definite(a)
        lam = float(np.linalg.eigvalsh(hyperherm.real_embedding(a))[0])
        oracle = lam > 1e-9 * (1.0 + float(np.max(np.abs(a.entries))))
        disagree += syl != oracle
        out.rows.append((src, a.n, syl, lam, syl == oracle))
    out.deviations["disagreements"] = disagree
    out.invariants["matches_eigenvalue_test"] = disagree == 0
    return out


def cmd_aleksandrov(args, rng) -> Outcome:
    out = Outcome(["source", "gap", "scale", "ok"])
    if args.inputs:
        mats = [_load_matrix(p).entries for p in args.inputs]
        cases = [(",".join(args.inputs), mats[:-1], mats[-1])]
    else:
        cases = []
        for i in range(args.count):
            pds = [hyperherm.HMatrix.random_pd(args.n, rng).entries for _ in range(args.n - 1)]
            cases.append((f"random[{i}]", pds, hyperherm.HMatrix.random(args.n, rng).entries))
    worst = 0.0
    for src, pds, x in cases:
        gap = hyperherm.aleksandrov_gap(pds, x)
        n = x.shape[0]
        scale = max(1.0, (max(float(np.max(np.abs(m))) for m in pds + [x]) ** n) ** 2)
        worst = min(worst, gap / scale)
        out.rows.append((src, gap, scale, gap >= -1e-9 * scale))
    out.deviations["min_relative_gap"] = worst
    out.invariants["gap_nonnegative"] = worst >= -1e-9
    return out


def cmd_signature(args, rng) -> Outcome:
    out = Outcome(["source", "n", "plus", "minus", "zero", "expected"])
    expected = (1, args.n * (2 * args.n - 1) - 1, 0)
    bad = 0
    for i in range(args.count):
        pds = [hyperherm.HMatrix.random_pd(args.n, rng).entries for _ in range(args.n - 2)]
        sig = hyperherm.signature_of_B(pds, n=args.n)
        bad += sig != expected
        out.rows.append((f"random[{i}]", args.n, *sig, sig == expected))
    out.deviations["mismatches"] = bad
    out.invariants["lorentzian_signature"] = bad == 0
    return out


def _fields(args, rng):
    if args.inputs:
        return [(str(p), _load_field(p)) for p in args.inputs]
    return [(f"random[{i}]", PolyField.random(args.n, args.degree, rng)) for i in range(args.count)]


def cmd_dirac_check(args, rng) -> Outcome:
    out = Outcome(["source", "commutator_dev", "transformation_dev", "scale"])
    worst_c = worst_t = 0.0
    for src, f in _fields(args, rng):
        pts = rng.standard_normal((args.samples, 4 * f.n))
        dc = max(commutator_deviation(f, i, j, pts) for i in range(f.n) for j in range(f.n))
        scale = max(1.0, float(np.max(np.abs(f.poly(pts)))))
        if f.quaternionic:
            dt = float("nan")
        else:
            a = rng.standard_normal((f.n, f.n, 4))
            hs = max(1.0, float(np.max(np.abs(hessian(f)(pts)))))
            dt = check_transformation(f, a, pts) / (hs * max(1.0, float(np.max(np.abs(a)))) ** 2)
            worst_t = max(worst_t, dt)
        worst_c = max(worst_c, dc / scale)
        out.rows.append((src, dc, dt, scale))
    out.deviations.update(commutator=worst_c, transformation=worst_t)
    out.invariants["operators_commute"] = worst_c <= 1e-10
    out.invariants["transformation_law"] = worst_t <= 1e-8
    return out


def cmd_psh_check(args, rng) -> Outcome:
    out = Outcome(["source", "is_psh", "is_strict", "witness_eig"])
    if args.inputs:
        fields_ = [(str(p), _load_field(p)) for p in args.inputs]
    else:
        fields_ = [(f"convex[{i}]", _strictly_psh_poly(args.n, rng)) for i in range(args.count)]
    disagree = 0
    for src, f in fields_:
        pts = rng.standard_normal((args.samples, 4 * f.n))
        v = psh.is_psh_hessian(f, pts)
        # cross-check with subharmonicity on random quaternionic lines
        lines = all(
            psh.is_subharmonic_on_line(f, rng.standard_normal(4 * f.n), rng.standard_normal(4 * f.n), rng.standard_normal((8, 4)))
            for _ in range(4)
        )
        disagree += v.is_psh and not lines
        out.rows.append((src, v.is_psh, v.is_strict, v.witness[1] if v.witness else float("nan")))
    out.deviations["line_disagreements"] = disagree
    out.invariants["hessian_and_line_tests_agree"] = disagree == 0
    if not args.inputs:
        out.invariants["convex_polynomials_are_psh"] = all(r[1] for r in out.rows)
    return out


def _default_ma_field():
    """``max(|q|^2, 2 t + 0.1)`` on a lattice: continuous, psh and not C^2."""
    return lambda p: np.maximum(np.sum(p * p, axis=-1), 2.0 * p[..., 0] + 0.1)


def cmd_ma_measure(args, rng) -> Outcome:
    out = Outcome(["delta", "psi_id", "integral", "residual"])
    if args.inputs:
        f = _load_field(args.inputs[0])
        if f.n != 1:
            raise ValueError("lattice experiments need n = 1 fields")
        func = f
    else:
        func = _default_ma_field()
    u = GridField.centered(func, args.half_width, args.cells, n=1)
    deltas = _parse_floats(args.deltas)
    psis = {f"bump{r:g}": psh.tensor_bump(np.zeros(4), r) for r in (0.15, 0.2, 0.25)}
    total = {}
    for pid, psi in psis.items():
        ints = psh.ma_integral_mollified(u, psi, deltas)
        res = [float("nan")] + [abs(b - a) for a, b in zip(ints, ints[1:])]
        out.rows.extend(psh.results_csv_rows(deltas, pid, ints, res))
        total[pid] = ints
    out.deviations["min_integral"] = min(min(v) for v in total.values())
    out.invariants["integrals_nonnegative"] = out.deviations["min_integral"] >= -1e-9
    return out


def blocki_pair(name: str, cells: int):
    """Lattice samples of two support functions for the max/min identity."""
    half = convex.HalfBall([0.0, 0.0], 1.0, [1.0, 0.0])
    other = convex.HalfBall([0.0, 0.0], 1.0, [-1.0, 0.0])
    k1 = convex.Embedded(half, (0, 4), 8)
    if name == "half-disks":
        k2 = convex.Embedded(other, (0, 4), 8)
    elif name == "nested":
        k2 = k1 + convex.Ball(np.zeros(8), 0.25)
    else:
        raise ValueError(f"unknown pair {name!r}")
    grid = valuations.GridSpec(axes=(0, 1, 4, 5), half_width=0.4, cells=cells)
    return grid.sample(k1, 2), grid.sample(k2, 2)


def blocki_weight():
    """Annulus in the ``(t_1, t_2)`` plane times a bump in ``(x_1, x_2)``."""
    a = psh.radial_bump(0.1, 0.17, coords=(0, 4))
    b = psh.radial_bump(0.0, 0.17, coords=(1, 5))
    return lambda p: a(p) * b(p)


def cmd_blocki(args, rng) -> Outcome:
    out = Outcome(["delta", "psi_id", "residual"])
    f, g = blocki_pair(args.pair, args.cells)
    psi = blocki_weight()
    deltas = _parse_floats(args.deltas)
    res = [psh.blocki_residual(f, g, None, psi, dl) for dl in deltas]
    for dl, r in zip(deltas, res):
        out.rows.append((dl, "annulus", r))
    out.deviations["final_over_first"] = res[-1] / res[0] if res[0] else 0.0
    if args.pair == "nested":
        out.invariants["nested_exactly_zero"] = all(r == 0.0 for r in res)
    else:
        out.invariants["strictly_decreasing"] = all(b < a for a, b in zip(res, res[1:]))
    return out


def _poly_callable(path):
    f = _load_field(path)
    if f.n != 1:
        raise ValueError("the lattice solver handles one quaternionic variable")
    return lambda p: f(p)


def cmd_dirichlet(args, rng) -> Outcome:
    out = Outcome(["h", "sup_error", "l2_error", "iterations"])
    hs = _parse_floats(args.h)
    if args.f or args.phi:
        if not (args.f and args.phi):
            raise ValueError("--f and --phi go together")
        f, phi = _poly_callable(args.f), _poly_callable(args.phi)
        exact = _poly_callable(args.exact) if args.exact else None
    else:
        if args.case not in dirichlet.BUILTIN_CASES:
            raise ValueError(f"unknown case {args.case!r}; choose from {sorted(dirichlet.BUILTIN_CASES)}")
        f, phi, exact = dirichlet.BUILTIN_CASES[args.case]
    checks = {}
    for h in hs:
        sol = dirichlet.solve_n1(f, phi, h, rtol=args.rtol, x0=args.x0, max_iter=args.max_iter)
        if exact is not None:
            err = sol.interior_values() - exact(sol.nodes)
            sup, l2 = float(np.max(np.abs(err))), float(np.sqrt(np.sum(err**2) * h**4))
        else:
            sup = l2 = float("nan")
        out.rows.append((h, sup, l2, sol.iterations))
        for k, v in sol.checks.items():
            checks[k] = checks.get(k, True) and v
    out.deviations["max_sup_error"] = max(r[1] for r in out.rows)
    out.invariants.update(checks)
    return out


BUILTIN_BODIES = {
    "cube": lambda n: convex.Box.cube(4 * n, 0.5),
    "ball": lambda n: convex.Ball(np.zeros(4 * n), 0.5),
    "half-ball": lambda n: convex.HalfBall(np.zeros(4 * n), 0.5, np.eye(4 * n)[0]),
}


def cmd_valuation(args, rng) -> Outcome:
    out = Outcome(["body_id", "k", "delta", "value", "stderr"])
    if args.inputs:
        bodies = [(str(p), _load_body(p)) for p in args.inputs]
    else:
        if args.body not in BUILTIN_BODIES:
            raise ValueError(f"unknown body {args.body!r}; choose from {sorted(BUILTIN_BODIES)}")
        bodies = [(args.body, BUILTIN_BODIES[args.body](args.n))]
    if not 1 <= args.k <= args.n:
        raise ValueError("k must lie in 1..n")
    eye = hyperherm.HMatrix.identity(args.n).entries
    weights = psh.WeightField.constant(args.n, [eye] * (args.n - args.k)).matrices
    spec = valuations.ValuationSpec(
        n=args.n,
        k=args.k,
        weights=weights,
        delta=args.delta,
        n_samples=args.samples,
        inner_nodes=args.inner_nodes,
        replicates=args.replicates,
        seed=args.seed,
        backend=args.backend,
    )
    worst = 0.0
    for bid, body in bodies:
        r = valuations.valuation(body, spec)
        out.rows.append((bid, args.k, args.delta, r.value, r.stderr))
        worst = max(worst, r.stderr)
    out.deviations["max_stderr"] = worst
    out.invariants["finite"] = all(math.isfinite(r[3]) for r in out.rows)
    return out


def selftest_valuation(args, rng) -> Outcome:
    """Translation invariance and homogeneity at the level of the quadrature."""
    out = Outcome(["check", "deviation"])
    spec = valuations.ValuationSpec(n=1, k=1, n_samples=4096, replicates=2, seed=args.seed)
    body = convex.Polytope(rng.standard_normal((6, 4)) * 0.5)
    base = valuations.valuation_integrand(body, spec)[2]
    moved = valuations.valuation_integrand(body.translate(rng.standard_normal(4)), spec)[2]
    dev_t = float(np.max(np.abs(moved - base)))
    scaled = valuations.valuation(body.scale(2.0), spec).value
    plain = valuations.valuation(body, spec).value
    dev_h = abs(scaled - 2.0 * plain) / max(1.0, abs(plain))
    out.rows += [("translation", dev_t), ("homogeneity", dev_h)]
    out.deviations.update(translation=dev_t, homogeneity=dev_h)
    out.invariants.update(translation_invariant=dev_t <= 1e-12, homogeneous=dev_h <= 1e-12)
    return out


def cmd_hkt_check(args, rng) -> Outcome:
    out = Outcome(["source", "n", "del_squared", "anticommutator", "real", "quarter_identity", "positive", "closed"])
    if args.inputs:
        fields_ = [(str(p), _load_field(p)) for p in args.inputs]
    else:
        fields_ = [(f"random[{i}]", PolyField.random(args.n, args.degree, rng)) for i in range(args.count)]
        fields_ += [(f"convex[{i}]", _strictly_psh_poly(args.n, rng)) for i in range(args.count)]
    worst = {"del_squared": 0.0, "anticommutator": 0.0, "quarter_identity": 0.0}
    all_real = closed = positive = True
    for src, f in fields_:
        if f.quaternionic:
            raise ValueError(f"{src}: the potential must be real-valued")
        pts = rng.standard_normal((args.samples, 4 * f.n))
        zero = hypercomplex.Form.function(f)
        d2 = hypercomplex.del_(hypercomplex.del_(zero)).max_abs_coeff()
        eta = hypercomplex.ddJ(f)
        anti = (eta + hypercomplex.del_J(hypercomplex.del_(zero))).max_abs_coeff()
        scale = max(1.0, eta.max_abs_coeff())
        real = hypercomplex.is_real(eta)
        h = hessian(f)(pts)
        quarter = float(np.max(np.abs(hypercomplex.t_map(eta)(pts) - 0.25 * h))) / max(1.0, float(np.max(np.abs(h))))
        strict = src.startswith("convex") or bool(args.inputs and args.strict)
        rep = hypercomplex.hkt_flat_check(f, strict=strict, samples=pts)
        worst["del_squared"] = max(worst["del_squared"], d2 / scale)
        worst["anticommutator"] = max(worst["anticommutator"], anti / scale)
        worst["quarter_identity"] = max(worst["quarter_identity"], quarter)
        all_real &= real
        closed &= rep.closed and rep.type_20
        if strict:
            positive &= rep.positive
        out.rows.append((src, f.n, d2, anti, real, quarter, rep.positive, rep.closed))
    out.deviations.update(worst)
    out.invariants.update(
        del_squared_zero=worst["del_squared"] <= 1e-12,
        anticommute=worst["anticommutator"] <= 1e-12,
        reality=bool(all_real),
        quarter_identity=worst["quarter_identity"] <= 1e-10,
        omega_closed=bool(closed),
        strict_potentials_positive=bool(positive),
    )
    return out


# -- parser ------------------------------------------------------------------


def _u64(text: str) -> int:
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", help="JSON file with option values (keys are long option names)")
    p.add_argument("--seed", type=_u64, default=0)
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    p.add_argument("--out", help="CSV path; the summary goes next to it with suffix .json")
    p.add_argument("--selftest", action="store_true", help="run the built-in invariant suite of this subcommand")
    return p


def _random_opts(p, n=3, count=20, integer=3, degree=None, samples=None):
    p.add_argument("inputs", nargs="*", help="input JSON files")
    p.add_argument("--n", type=int, default=n)
    p.add_argument("--count", type=int, default=count)
    p.add_argument("--integer", type=int, default=integer)
    if degree is not None:
        p.add_argument("--degree", type=int, default=degree)
    if samples is not None:
        p.add_argument("--samples", type=int, default=samples)


COMMANDS = {
    "moore-det": (cmd_moore_det, "Moore determinants of matrix files or seeded random matrices"),
    "mixed-disc": (cmd_mixed_disc, "mixed discriminant of n matrices"),
    "sylvester": (cmd_sylvester, "positive definiteness by leading minors vs eigenvalues"),
    "aleksandrov": (cmd_aleksandrov, "Aleksandrov inequality gaps (n - 1 PD matrices and X)"),
    "signature": (cmd_signature, "signature of the mixed-discriminant bilinear form"),
    "dirac-check": (cmd_dirac_check, "commutation and transformation law of the Dirac operators"),
    "psh-check": (cmd_psh_check, "plurisubharmonicity of polynomial fields"),
    "ma-measure": (cmd_ma_measure, "mollified Monge-Ampere pairings on a lattice"),
    "blocki": (cmd_blocki, "max/min identity residuals along a mollification schedule"),
    "dirichlet": (cmd_dirichlet, "Dirichlet problem on the unit ball of H"),
    "valuation": (cmd_valuation, "valuations of convex bodies"),
    "hkt-check": (cmd_hkt_check, "flat hypercomplex identities and HKT metrics"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="quatpsh", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    common = _common()
    ps = {name: sub.add_parser(name, parents=[common], help=h) for name, (_, h) in COMMANDS.items()}
    _random_opts(ps["moore-det"])
    _random_opts(ps["mixed-disc"])
    _random_opts(ps["sylvester"], count=200)
    _random_opts(ps["aleksandrov"], count=100)
    ps["signature"].add_argument("--n", type=int, default=3)
    ps["signature"].add_argument("--count", type=int, default=20)
    _random_opts(ps["dirac-check"], n=2, count=10, degree=4, samples=20)
    _random_opts(ps["psh-check"], n=2, count=5, samples=50)
    p = ps["ma-measure"]
    p.add_argument("inputs", nargs="*", help="polynomial field JSON (n = 1)")
    p.add_argument("--deltas", default="0.2,0.1,0.05")
    p.add_argument("--cells", type=int, default=24)
    p.add_argument("--half-width", type=float, default=0.6)
    p = ps["blocki"]
    p.add_argument("--pair", choices=["half-disks", "nested"], default="half-disks")
    p.add_argument("--deltas", default="0.2,0.1,0.05")
    p.add_argument("--cells", type=int, default=32)
    p = ps["dirichlet"]
    p.add_argument("--case", default="harmonic-t")
    p.add_argument("--f", help="polynomial JSON for the right-hand side")
    p.add_argument("--phi", help="polynomial JSON for the boundary data")
    p.add_argument("--exact", help="polynomial JSON of the exact solution, if known")
    p.add_argument("--h", default="1/8", help="comma-separated spacings, fractions allowed")
    p.add_argument("--rtol", type=float, default=1e-10)
    p.add_argument("--x0", choices=["zero", "random"], default="zero")
    p.add_argument("--max-iter", type=int, default=None)
    p = ps["valuation"]
    p.add_argument("inputs", nargs="*", help="body JSON files")
    p.add_argument("--body", default="cube")
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--delta", type=float, default=0.2)
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--inner-nodes", type=int, default=64)
    p.add_argument("--replicates", type=int, default=8)
    p.add_argument("--backend", choices=["qmc", "grid"], default="qmc")
    _random_opts(ps["hkt-check"], n=1, count=5, degree=4, samples=20)
    ps["hkt-check"].add_argument("--strict", action="store_true", help="require a positive metric for input potentials")
    parser._subparsers_map = ps
    return parser


SELFTEST_ARGS = {
    "moore-det": ["--count", "50", "--n", "4"],
    "mixed-disc": ["--count", "20", "--n", "3"],
    "sylvester": ["--count", "100"],
    "aleksandrov": ["--count", "20"],
    "signature": ["--count", "3", "--n", "2"],
    "dirac-check": ["--count", "3"],
    "psh-check": ["--count", "3"],
    "ma-measure": ["--cells", "16", "--deltas", "0.3,0.2"],
    "blocki": ["--pair", "nested", "--cells", "16", "--deltas", "0.1"],
    "dirichlet": ["--case", "norm-sq", "--h", "1/4,1/6"],
    "valuation": [],
    "hkt-check": ["--count", "2"],
}


SELFTESTS = {"valuation": selftest_valuation}


def _parse(parser, argv):
    args = parser.parse_args(argv)
    if args.config:
        cfg = _read_json(args.config)
        if not isinstance(cfg, dict):
            raise InputError("config must be a JSON object")
        sub = parser._subparsers_map[args.command]
        known = {a.dest for a in sub._actions}
        cfg = {k.replace("-", "_"): v for k, v in cfg.items()}
        unknown = sorted(set(cfg) - known - {"command"})
        if unknown:
            raise InputError(f"unknown config keys: {unknown}")
        sub.set_defaults(**{k: v for k, v in cfg.items() if k != "command"})
        args = parser.parse_args(argv)
    return args


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = _parse(parser, argv)
        if args.selftest:
            extra = ["--out", args.out] if args.out else []
            argv_st = [args.command, "--seed", str(args.seed), "--selftest"] + SELFTEST_ARGS[args.command] + extra
            args = parser.parse_args(argv_st)
        if args.threads < 1:
            raise ValueError("--threads must be positive")
        func = COMMANDS[args.command][0]
        if args.selftest and args.command in SELFTESTS:
            func = SELFTESTS[args.command]
        with threadpool_limits(limits=args.threads):
            outcome = func(args, np.random.default_rng(args.seed))
    except SystemExit as exc:
        return int(exc.code or 0)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except dirichlet.NonConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except ArithmeticError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    echo = {k: v for k, v in sorted(vars(args).items()) if k not in ("threads", "out")}
    summary = {
        "command": args.command,
        "inputs": echo,
        "seed": args.seed,
        "rows": len(outcome.rows),
        "max_deviations": outcome.deviations,
        "invariants": outcome.invariants,
        "passed": outcome.passed,
    }
    text = render_csv(outcome)
    summary_text = json.dumps(_jsonable(summary), indent=2, sort_keys=True) + "\n"
    if args.out:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text)
        out.with_suffix(".json").write_text(summary_text)
    else:
        sys.stdout.write(text)
        sys.stderr.write(summary_text)
    return EXIT_OK if outcome.passed else EXIT_INVARIANT


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
