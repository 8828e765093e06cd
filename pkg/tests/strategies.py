"""Hypothesis strategies shared by the property tests."""

import numpy as np
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


def vectors(m, elements=finite):
    return arrays(np.float64, (m,), elements=elements)


@st.composite
def psd_matrices(draw, m, min_eig=0.0):
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    Q, _ = np.linalg.qr(rng.standard_normal((m, m)))
    lam = rng.uniform(min_eig, 4.0, m)
    return (Q * lam) @ Q.T


@st.composite
def symmetric_matrices(draw, max_dim=8):
    m = draw(st.integers(1, max_dim))
    seed = draw(st.integers(0, 2**32 - 1))
    B = np.random.default_rng(seed).uniform(-5, 5, (m, m))
    return 0.5 * (B + B.T)
