"""Transient energy functions of simplified decoupled oscillators.

For ``w1' = f(w2) = sum_j v_j w2**j`` and ``w2' = w1`` the first integral is

    V(w1, w2) = w1**2 / 2 - integral_0^w2 f(s) ds.

The unstable equilibrium point (UEP) is the smallest positive zero of ``f`` and
the critical energy is ``V(0, w_uep)``. An initial state is stable when its
energy is below the critical energy.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .decouple import TransformChain, inverse_map
from .errors import DecouplingError, NoPositiveRoot, NotSimplified
from .oscillators import REAL_SCALE, DecoupledOscillator, mode_state

TIE_TOL = 1e-10


class Verdict(str, enum.Enum):
    STABLE = "stable"
    UNSTABLE = "unstable"


@dataclass(frozen=True, eq=False)
class EnergyFunction:
    """``V = w1**2/2 + sum_n potential[n] * w2**n`` for one mode."""

    mode: int
    force: np.ndarray
    potential: np.ndarray
    w_uep: float | None
    v_crit: float | None
    kinetic: float = 0.5

    def __call__(self, w1, w2):
        w1 = np.asarray(w1, dtype=float)
        return self.kinetic * w1**2 + self.potential_energy(w2)

    def potential_energy(self, w2):
        return np.polyval(self.potential[::-1], np.asarray(w2, dtype=float))

    def force_at(self, w2):
        return np.polyval(np.r_[self.force[::-1], 0.0], np.asarray(w2, dtype=float))


def _force_polynomial(osc: DecoupledOscillator) -> np.ndarray:
    if osc.displacement != {(1, 0): 1.0}:
        raise NotSimplified("displacement equation must be exactly w2' = w1")
    for (j, l) in osc.velocity:
        if j != 0 or l < 1:
            raise NotSimplified(f"velocity equation has non-potential term {(j, l)}")
    return osc.force_coefficients()


def find_uep(osc: DecoupledOscillator, imag_tol: float = 1e-9) -> float:
    """Smallest strictly positive real zero of ``f(w2) = sum_j v_j w2**j``."""
    v = _force_polynomial(osc)
    return _smallest_positive_root(v, imag_tol)


def _smallest_positive_root(v: np.ndarray, imag_tol: float = 1e-9) -> float:
    # f(w) = w * g(w); the zero at the origin is the stable equilibrium
    g = np.trim_zeros(v[::-1], "f")
    if g.size < 2:
        raise NoPositiveRoot("force polynomial has no nonzero root")
    roots = np.roots(g)
    real = roots[np.abs(roots.imag) <= imag_tol * np.maximum(1.0, np.abs(roots))].real
    positive = np.sort(real[real > 0])
    if positive.size == 0:
        raise NoPositiveRoot("force polynomial has no positive real root")
    w = float(positive[0])
    # one Newton polish on g
    dg = np.polyder(g)
    slope = np.polyval(dg, w)
    if slope != 0:
        w -= np.polyval(g, w) / slope
    f = np.polyval(np.r_[v[::-1], 0.0], w)
    if abs(f) >= 1e-8 * np.max(np.abs(v)):
        raise DecouplingError(f"UEP residual {abs(f):.3e} too large")
    return w


def energy_function(osc: DecoupledOscillator) -> EnergyFunction:
    """First integral of a simplified oscillator, with its UEP when one exists."""
    v = _force_polynomial(osc)
    potential = np.zeros(v.size + 2)
    for j, vj in enumerate(v, start=1):
        potential[j + 1] = -vj / (j + 1)
    try:
        w = _smallest_positive_root(v)
    except NoPositiveRoot:
        w = None
    ef = EnergyFunction(osc.mode, v, potential, w, None)
    if w is not None:
        object.__setattr__(ef, "v_crit", float(ef(0.0, w)))
    return ef


def critical_energy(ef: EnergyFunction) -> float:
    if ef.w_uep is None:
        raise NoPositiveRoot(f"mode {ef.mode} has no UEP")
    return float(ef(0.0, ef.w_uep))


def assess(ef: EnergyFunction, w0) -> Verdict:
    """Stable iff ``V(w0) < v_crit``; a tie within ``1e-10`` counts as unstable."""
    if ef.v_crit is None:
        # no UEP: the potential well never closes, every bounded level set is safe
        return Verdict.STABLE
    value = float(ef(w0[0], w0[1]))
    if value < ef.v_crit - TIE_TOL * max(1.0, abs(ef.v_crit)):
        return Verdict.STABLE
    return Verdict.UNSTABLE


@dataclass(frozen=True, eq=False)
class FaultScenario:
    """Fault-on dynamics plus how to express a cleared state in post-fault coordinates.

    ``fault_field`` acts on the same physical state vector as ``x_pre`` (the
    pre-fault equilibrium). After clearing, the post-fault jet coordinates are
    ``x - post_reference``.
    """

    fault_field: object
    x_pre: np.ndarray
    post_reference: np.ndarray
    dt: float = 1e-3
    name: str = ""

    def to_post(self, x) -> np.ndarray:
        return np.asarray(x, dtype=float) - self.post_reference


@dataclass(frozen=True, eq=False)
class CctReport:
    durations: np.ndarray
    energies: np.ndarray
    critical: np.ndarray
    verdicts: list
    cct: float
    cct_is_lower_bound: bool
    binding_mode: int | None
    states: np.ndarray = field(repr=False, default=None)

    def rows(self):
        for d, e, v in zip(self.durations, self.energies, self.verdicts):
            yield float(d), e, v


def clearing_states(scenario: FaultScenario, durations) -> np.ndarray:
    """Fault-on states at each clearing time, integrating piecewise with RK4."""
    from .simulate import rk4_advance

    durations = np.asarray(durations, dtype=float)
    if durations.size and (np.any(np.diff(durations) < 0) or durations[0] < 0):
        raise ValueError("durations must be non-negative and ascending")
    x = np.array(scenario.x_pre, dtype=float)
    t = 0.0
    out = np.empty((durations.size, x.size))
    for i, d in enumerate(durations):
        span = d - t
        if span > 0:
            steps = int(np.ceil(span / scenario.dt - 1e-9))
            x = rk4_advance(scenario.fault_field, x, span / steps, steps)
            t = d
        out[i] = x
    return out


def cct_sweep(
    scenario: FaultScenario,
    chain: TransformChain,
    efs,
    durations,
    basis,
    scale: float = REAL_SCALE,
) -> CctReport:
    """Initial energies of each mode after clearing at each duration, and the CCT.

    The CCT is the longest tested duration such that it and every shorter one
    leave all modes stable. ``binding_mode`` is the mode that first goes
    unstable, or ``None`` when no tested duration is unstable.
    """
    efs = list(efs)
    durations = np.asarray(durations, dtype=float)
    states = clearing_states(scenario, durations)
    energies = np.zeros((durations.size, len(efs)))
    verdicts = []
    for i, x in enumerate(states):
        z = inverse_map(chain, scenario.to_post(x))
        row = []
        for col, ef in enumerate(efs):
            w = mode_state(z, basis, ef.mode, scale)
            energies[i, col] = float(ef(*w))
            row.append(assess(ef, w))
        verdicts.append(row)
    cct = float(durations[-1]) if durations.size else 0.0
    lower_bound = True
    binding = None
    for i, row in enumerate(verdicts):
        bad = [c for c, v in enumerate(row) if v is Verdict.UNSTABLE]
        if bad:
            cct = float(durations[i - 1]) if i > 0 else 0.0
            lower_bound = False
            binding = efs[bad[0]].mode
            break
    critical = np.array([np.inf if ef.v_crit is None else ef.v_crit for ef in efs])
    return CctReport(durations, energies, critical, verdicts, cct, lower_bound, binding, states)
