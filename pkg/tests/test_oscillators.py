import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oscdecouple.decouple import IntraModalTarget, build_smib_target, run_decoupling
from oscdecouple.errors import DecouplingError, ImaginaryResidue
from oscdecouple.modal import eigendecompose, normalize_basis
from oscdecouple.oscillators import (
    DecoupledOscillator,
    mode_state,
    mode_uw,
    simplify_undamped,
    smib_realize,
    to_real,
)
from oscdecouple.poly import TruncatedPolyMap, conjugate_partner, linear_map
from oscdecouple.power import poly_jet
from oscdecouple.simulate import integrate
from oscdecouple.synth import random_system


def linear_decoupled(sigma, omega):
    a = np.array([[sigma, omega], [-omega, sigma]])
    jet = poly_jet(linear_map(a, 3))
    basis = normalize_basis(eigendecompose(jet))
    djet, _ = run_decoupling(jet, basis, IntraModalTarget.st(), 3)
    return djet


@pytest.mark.parametrize("scale", [0.5, 1.0])
def test_linear_mode_real_form(scale):
    sigma, omega = -0.3, 4.0
    osc = to_real(linear_decoupled(sigma, omega), 0, scale=scale)
    assert osc.velocity == pytest.approx({(1, 0): 2 * sigma, (0, 1): -(sigma**2 + omega**2)})
    assert osc.displacement == pytest.approx({(1, 0): 1.0})
    assert osc.meta["scale"] == scale


def test_ninebus_linear_coefficients(ninebus_st):
    djet, _ = ninebus_st
    m1, m2 = to_real(djet, 0), to_real(djet, 1)
    assert m1.velocity[(1, 0)] == pytest.approx(-0.5, rel=1e-2)
    assert m1.velocity[(0, 1)] == pytest.approx(-166.0, rel=1e-2)
    assert m2.velocity[(1, 0)] == pytest.approx(-0.5, rel=1e-2)
    assert m2.velocity[(0, 1)] == pytest.approx(-37.1, rel=1e-2)


def test_ninebus_force_coefficients_frozen(ninebus_st):
    djet, _ = ninebus_st
    m1, m2 = to_real(djet, 0), to_real(djet, 1)
    assert m1.force_coefficients() == pytest.approx([-166.489, 4.98389, 32.6857], rel=1e-4)
    assert m2.force_coefficients() == pytest.approx([-37.1143, 13.7758, 4.62256], rel=1e-4)


def test_scale_changes_degree_n_by_power_of_two(ninebus_st):
    djet, _ = ninebus_st
    half, unit = to_real(djet, 0, scale=0.5), to_real(djet, 0, scale=1.0)
    for (j, l), v in unit.velocity.items():
        assert half.velocity[(j, l)] == pytest.approx(v * 2 ** (j + l - 1), rel=1e-10)


def test_displacement_equation_has_unit_speed_coefficient(ninebus_st):
    djet, _ = ninebus_st
    for mode in range(2):
        assert to_real(djet, mode).displacement[(1, 0)] == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10_000))
def test_linearization_keeps_eigenvalues(seed):
    s = random_system(2, 3, seed)
    jet = poly_jet(s.field)
    basis = normalize_basis(eigendecompose(jet))
    djet, _ = run_decoupling(jet, basis, IntraModalTarget.st(), 3)
    for mode in range(2):
        osc = to_real(djet, mode)
        lam = np.sort_complex(np.linalg.eigvals(osc.linearization()))
        ref = np.sort_complex(np.array(basis.pair(mode)))
        assert np.allclose(lam, ref, rtol=1e-8)


def test_non_conjugate_eigenvalues_leave_imaginary_residue():
    djet = linear_decoupled(-0.2, 3.0)
    lam = np.array([-0.2 + 3j, -0.5 - 2j])
    skew = replace(djet.basis, eigenvalues=lam)
    system = TruncatedPolyMap(np.diag(lam), ({(2, 0): 1.0}, {(0, 2): 1.0}), 3)
    with pytest.raises(ImaginaryResidue):
        to_real(replace(djet, system=system, basis=skew), 0)


def test_trajectory_equivalence(ninebus_st):
    djet, _ = ninebus_st
    mode = 1
    eq = djet.mode_equation(mode)
    pair = TruncatedPolyMap.from_components([eq, conjugate_partner(eq)], 2, 3)
    osc = to_real(djet, mode)
    a = 0.02 + 0.01j
    z0 = np.array([a, np.conj(a)])
    u = 0.5 * mode_uw(*djet.basis.pair(mode))
    zt = integrate(pair, z0, 1e-3, 10.0)
    wt = integrate(osc, (u @ z0).real, 1e-3, 10.0)
    mapped = (zt.states @ u.T).real
    assert np.max(np.abs(mapped - wt.states)) < 1e-8


def test_mode_state_batch(ninebus_basis):
    z = np.array([[0.1 + 0.2j, 0.05j], [0.1 - 0.2j, -0.05j], [0.3, -0.1 + 0.1j], [0.3, -0.1 - 0.1j]])
    batch = mode_state(z, ninebus_basis, 1)
    for j in range(2):
        assert np.allclose(batch[:, j], mode_state(z[:, j], ninebus_basis, 1))


def test_simplify_undamped(ninebus_st):
    djet, _ = ninebus_st
    osc = simplify_undamped(to_real(djet, 0))
    assert set(osc.velocity) == {(0, 1), (0, 2), (0, 3)}
    assert osc.displacement == {(1, 0): 1.0}
    assert osc.simplified
    assert simplify_undamped(osc).velocity == osc.velocity


def test_simplified_reference_form():
    osc = DecoupledOscillator(0, (0, 0), {(0, 1): -166.0, (0, 2): 5.0, (0, 3): 35.3, (1, 0): -0.5, (1, 1): 0.1},
                              {(1, 0): 1.0, (0, 2): 0.01}, 3)
    simple = simplify_undamped(osc)
    assert simple.velocity == {(0, 1): -166.0, (0, 2): 5.0, (0, 3): 35.3}
    assert simple.force_coefficients() == pytest.approx([-166.0, 5.0, 35.3])


def test_smib_realize(ninebus_basis, ninebus_smib_target):
    for mode in range(2):
        osc = smib_realize(ninebus_smib_target, mode, 3)
        params = ninebus_smib_target.smib[mode]
        assert osc.velocity[(1, 0)] == pytest.approx(-params.alpha)
        for n in range(1, 4):
            expected = params.beta * np.cos(params.y_s + (n - 1) * np.pi / 2) / math.factorial(n)
            assert osc.velocity[(0, n)] == pytest.approx(-expected)
        lam = np.sort_complex(np.linalg.eigvals(osc.linearization()))
        assert np.allclose(lam, np.sort_complex(np.array(ninebus_basis.pair(mode))), rtol=1e-8)


def test_smib_realize_zero_steady_angle_drops_even_terms():
    a = np.array([[0.0, 1.0], [-4.0, -0.2]])
    basis = normalize_basis(eigendecompose(a, angle_indices=(0,)))
    target = build_smib_target(basis, np.zeros(2), 3)
    osc = smib_realize(target, 0, 3)
    assert abs(osc.velocity[(0, 2)]) < 1e-12 * abs(osc.velocity[(0, 1)])


def test_smib_realize_requires_smib_target():
    with pytest.raises(DecouplingError):
        smib_realize(IntraModalTarget.st(), 0, 3)
