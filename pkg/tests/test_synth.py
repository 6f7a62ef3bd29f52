import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from oscdecouple.power import build_swing_field
from oscdecouple.synth import _min_divisor, random_swing_system, random_system


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 3), st.integers(2, 4), st.integers(0, 10_000))
def test_random_system_spectrum(n_modes, k, seed):
    s = random_system(n_modes, k, seed)
    assert s.n == 2 * n_modes
    assert s.field.max_degree == k
    lam = np.sort_complex(np.linalg.eigvals(s.field.linear.real))
    assert np.allclose(lam, np.sort_complex(s.eigenvalues), rtol=1e-8, atol=1e-10)
    assert np.all(s.eigenvalues.real < 0)
    assert _min_divisor(s.eigenvalues, k) >= 0.05 * np.max(np.abs(s.eigenvalues))


def test_random_system_reproducible():
    a, b = random_system(2, 3, 42), random_system(2, 3, 42)
    assert np.array_equal(a.field.linear, b.field.linear)
    assert a.field.nonlinear == b.field.nonlinear


def test_min_divisor_detects_resonance():
    assert _min_divisor(np.array([2j, -2j, 4j, -4j]), 2) == 0


def test_random_swing_system_equilibrium():
    system, x = random_swing_system(4, 1)
    f = build_swing_field(system)
    assert np.linalg.norm(f(x)) < 1e-10
    assert np.all(x[1::2] == 0)
    c = system.network.C
    assert np.allclose(c, c.T) and np.all(c[~np.eye(4, dtype=bool)] < 0)
