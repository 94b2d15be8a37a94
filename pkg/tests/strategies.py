"""Hypothesis strategies shared by the test modules."""

import numpy as np
from hypothesis import strategies as st


@st.composite
def hyperhermitian(draw, n=None, lo=-3, hi=3, max_n=4):
    """Integer hyperhermitian matrix of shape (n, n, 4)."""
    if n is None:
        n = draw(st.integers(1, max_n))
    ints = st.integers(lo, hi)
    a = np.zeros((n, n, 4))
    for r in range(n):
        a[r, r, 0] = draw(ints)
        for s in range(r + 1, n):
            q = np.array([draw(ints) for _ in range(4)], dtype=float)
            a[r, s] = q
            a[s, r] = q * np.array([1, -1, -1, -1])
    return a


@st.composite
def quaternions(draw, bound=10.0):
    f = st.floats(-bound, bound, allow_nan=False)
    return np.array([draw(f) for _ in range(4)])
