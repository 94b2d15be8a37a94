"""Quasi-Monte Carlo rules: scrambled Halton points, box and ball samplers."""

from __future__ import annotations

import numpy as np
from scipy.special import ndtri
from scipy.stats import qmc

__all__ = ["halton", "box_points", "ball_points", "shell_points", "replicate_seeds", "box_integral"]


def replicate_seeds(seed: int, replicates: int) -> list[int]:
    ss = np.random.SeedSequence(seed)
    return [int(s.generate_state(1)[0]) for s in ss.spawn(replicates)]


def halton(n: int, d: int, seed: int | None = None, scramble: bool = True) -> np.ndarray:
    """First ``n`` points of a (digit-scrambled) Halton sequence in ``[0, 1)^d``."""
    return qmc.Halton(d=d, scramble=scramble, seed=seed).random(n)


def box_points(n: int, lo, hi, seed: int | None = None) -> np.ndarray:
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    return lo + (hi - lo) * halton(n, len(lo), seed)


def _directions_and_radii(n: int, d: int, seed):
    u = np.clip(halton(n, d + 1, seed), 1e-12, 1 - 1e-12)
    g = ndtri(u[:, 1:])
    return g / np.linalg.norm(g, axis=1, keepdims=True), u[:, 0]


def ball_points(n: int, d: int, radius: float = 1.0, seed: int | None = None) -> np.ndarray:
    """Low-discrepancy points, uniform in the ``d``-ball of given radius."""
    g, u = _directions_and_radii(n, d, seed)
    return radius * u[:, None] ** (1.0 / d) * g


def shell_points(n: int, d: int, r0: float, r1: float, seed: int | None = None) -> np.ndarray:
    """Low-discrepancy points uniform in the shell ``r0 <= |y| <= r1`` of ``R^d``."""
    g, u = _directions_and_radii(n, d, seed)
    r = (r0**d + u * (r1**d - r0**d)) ** (1.0 / d)
    return r[:, None] * g


def box_integral(func, lo, hi, n_samples: int, seed: int = 0, replicates: int = 8):
    """Randomized-QMC integral of ``func`` over a box.

    Returns
    -------
    mean, stderr, values : float, float, ndarray
        ``values`` holds the per-replicate estimates.
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    vol = float(np.prod(hi - lo))
    vals = []
    for s in replicate_seeds(seed, replicates):
        pts = box_points(n_samples, lo, hi, s)
        vals.append(vol * float(np.mean(func(pts))))
    vals = np.array(vals)
    se = float(vals.std(ddof=1) / np.sqrt(len(vals))) if len(vals) > 1 else float("nan")
    return float(vals.mean()), se, vals
