import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oscdecouple.decouple import IntraModalTarget, run_decoupling
from oscdecouple.energy import (
    FaultScenario,
    Verdict,
    assess,
    cct_sweep,
    clearing_states,
    critical_energy,
    energy_function,
    find_uep,
)
from oscdecouple.errors import NoPositiveRoot, NotSimplified
from oscdecouple.modal import eigendecompose, normalize_basis
from oscdecouple.oscillators import DecoupledOscillator, simplify_undamped, to_real
from oscdecouple.poly import TruncatedPolyMap, linear_map
from oscdecouple.power import poly_jet
from oscdecouple.simulate import integrate


def simplified(*v):
    vel = {(0, j): c for j, c in enumerate(v, start=1)}
    return DecoupledOscillator(0, (0, 0), vel, {(1, 0): 1.0}, len(v), simplified=True)


MODE1 = simplified(-166.0, 5.0, 35.3)
MODE2 = simplified(-37.1, 13.8, 5.13)


def test_potential_coefficients():
    p1 = energy_function(MODE1).potential
    p2 = energy_function(MODE2).potential
    assert p1[2:5] == pytest.approx([83.0, -5.0 / 3, -8.825])
    assert p2[2:5] == pytest.approx([18.55, -4.6, -1.2825])
    assert p1[0] == p1[1] == 0


def test_reference_uep_and_critical_energy():
    e1, e2 = energy_function(MODE1), energy_function(MODE2)
    assert e1.w_uep == pytest.approx(2.0986, abs=1e-3)
    assert e2.w_uep == pytest.approx(1.6618, abs=1e-3)
    assert e1.v_crit == pytest.approx(178.9041, rel=1e-3)
    assert e2.v_crit == pytest.approx(20.3363, rel=1e-3)
    assert critical_energy(e1) == e1.v_crit


def test_uep_is_a_zero_of_the_force():
    w = find_uep(MODE1)
    assert abs(-166.0 * w + 5.0 * w**2 + 35.3 * w**3) < 1e-8 * 166


def test_harmonic_energy():
    ef = energy_function(simplified(-4.0))
    assert ef(1.0, 0.5) == pytest.approx(0.5 + 2.0 * 0.25)
    assert ef.w_uep is None
    assert assess(ef, (100.0, 100.0)) is Verdict.STABLE
    with pytest.raises(NoPositiveRoot):
        find_uep(simplified(-4.0))
    with pytest.raises(NoPositiveRoot):
        critical_energy(ef)


def test_no_positive_root():
    # -w - w**3 only vanishes at the origin
    with pytest.raises(NoPositiveRoot):
        find_uep(simplified(-1.0, 0.0, -1.0))


def test_unsimplified_oscillator_rejected():
    damped = DecoupledOscillator(0, (0, 0), {(0, 1): -4.0, (1, 0): -0.1}, {(1, 0): 1.0}, 3)
    with pytest.raises(NotSimplified):
        energy_function(damped)
    with pytest.raises(NotSimplified):
        find_uep(DecoupledOscillator(0, (0, 0), {(0, 1): -4.0}, {(1, 0): 1.0, (0, 2): 0.1}, 3))


def test_assess_origin_uep_and_above():
    e1, e2 = energy_function(MODE1), energy_function(MODE2)
    assert assess(e1, (0.0, 0.0)) is Verdict.STABLE
    # a state sitting on the UEP ties with the critical energy
    assert assess(e1, (0.0, e1.w_uep)) is Verdict.UNSTABLE
    w1 = np.sqrt(2 * 22.092)
    assert e2(w1, 0.0) == pytest.approx(22.092)
    assert assess(e2, (w1, 0.0)) is Verdict.UNSTABLE


@settings(max_examples=30, deadline=None)
@given(st.floats(-3.0, 3.0), st.floats(-0.5, 2.5))
def test_verdict_matches_energy_level(w1, w2):
    ef = energy_function(MODE2)
    expected = Verdict.STABLE if ef(w1, w2) < ef.v_crit - 1e-9 else Verdict.UNSTABLE
    if abs(ef(w1, w2) - ef.v_crit) > 1e-6:
        assert assess(ef, (w1, w2)) is expected


def test_energy_conserved_along_trajectories():
    ef = energy_function(MODE1)
    traj = integrate(MODE1, np.array([5.0, 0.3]), 1e-3, 5.0)
    v = ef(traj.states[:, 0], traj.states[:, 1])
    assert np.max(np.abs(v - v[0])) < 1e-8 * max(1.0, abs(v[0]))


def test_energy_level_bounds_trajectory_below_uep():
    ef = energy_function(MODE1)
    w0 = np.array([0.0, 0.95 * ef.w_uep])
    assert assess(ef, w0) is Verdict.STABLE
    traj = integrate(MODE1, w0, 1e-3, 3.0)
    assert np.max(traj.states[:, 1]) < ef.w_uep


def _linear_chain():
    a = np.array([[0.0, 1.0], [-4.0, -0.2]])
    jet = poly_jet(linear_map(a, 3))
    basis = normalize_basis(eigendecompose(jet))
    djet, chain = run_decoupling(jet, basis, IntraModalTarget.st(), 3)
    return djet, chain, basis


def test_cct_sweep_zero_duration_and_linear_system():
    djet, chain, basis = _linear_chain()
    osc = simplify_undamped(to_real(djet, 0))
    ef = energy_function(osc)
    still = TruncatedPolyMap.zero(2, 1)
    scenario = FaultScenario(still, np.zeros(2), np.zeros(2))
    report = cct_sweep(scenario, chain, [ef], [0.0], basis)
    assert report.energies[0, 0] == 0.0
    assert report.verdicts == [[Verdict.STABLE]]
    assert report.cct == 0.0 and report.cct_is_lower_bound and report.binding_mode is None


def test_cct_sweep_reports_first_unstable_mode():
    djet, chain, basis = _linear_chain()
    ef = energy_function(simplified(-4.0, 0.0, 4.0))
    # a constant accelerating torque
    scenario = FaultScenario(lambda x: np.array([x[1], 1.0]), np.zeros(2), np.zeros(2), dt=1e-3)
    report = cct_sweep(scenario, chain, [ef], [0.0, 0.3, 0.6, 1.2, 1.5], basis)
    assert not report.cct_is_lower_bound
    assert report.binding_mode == 0
    first_bad = next(i for i, row in enumerate(report.verdicts) if row[0] is Verdict.UNSTABLE)
    assert report.cct == report.durations[first_bad - 1]
    assert np.all(np.diff(report.energies[:, 0]) > 0)


def test_clearing_states_match_direct_integration():
    field = lambda x: np.array([x[1], -x[0]])
    scenario = FaultScenario(field, np.array([1.0, 0.0]), np.zeros(2), dt=1e-3)
    out = clearing_states(scenario, [0.0, 0.5, 1.0])
    assert np.allclose(out[0], [1.0, 0.0])
    assert np.allclose(out[2], [np.cos(1.0), -np.sin(1.0)], atol=1e-10)
    with pytest.raises(ValueError):
        clearing_states(scenario, [0.5, 0.1])
