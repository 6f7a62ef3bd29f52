"""Classical-model multi-machine power systems and their Taylor jets.

State ordering is ``(delta_1, omega_1, delta_2, omega_2, ...)`` with angles in
radians and speed deviations in rad/s. The swing equation is

    delta_i'' + D_i/(2 H_i) delta_i' + omega_s/(2 H_i) (Pm_i - Pe_i) = 0,
    Pe_i = E_i**2 G_i + sum_j C_ij sin(delta_ij) + D_ij cos(delta_ij).

Note the sign: with this convention a synchronizing coupling has ``C_ij < 0``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NoConvergence, ResidualTooLarge, SingularJacobian
from .poly import TrigTerm, TrigVectorField, TruncatedPolyMap, taylor_trig


@dataclass(frozen=True)
class MachineParams:
    H: float
    D: float
    Pm: float
    E: float

    def __post_init__(self):
        if self.H <= 0:
            raise ValueError(f"inertia constant must be positive, got {self.H}")
        if self.E <= 0:
            raise ValueError(f"EMF magnitude must be positive, got {self.E}")
        if self.D < 0:
            raise ValueError(f"damping must be non-negative, got {self.D}")


@dataclass(frozen=True, eq=False)
class NetworkParams:
    G: np.ndarray
    C: np.ndarray
    Dij: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.G, dtype=float)
        c = np.array(self.C, dtype=float)
        d = np.array(self.Dij, dtype=float)
        m = g.size
        if c.shape != (m, m) or d.shape != (m, m):
            raise ValueError("C and Dij must be m x m")
        np.fill_diagonal(c, 0.0)
        np.fill_diagonal(d, 0.0)
        object.__setattr__(self, "G", g)
        object.__setattr__(self, "C", c)
        object.__setattr__(self, "Dij", d)


@dataclass(frozen=True, eq=False)
class PowerSystem:
    machines: tuple
    network: NetworkParams
    omega_s: float = 2 * np.pi * 60

    def __post_init__(self):
        object.__setattr__(self, "machines", tuple(self.machines))
        if len(self.machines) != self.network.G.size:
            raise ValueError("network size does not match machine count")

    @property
    def m(self) -> int:
        return len(self.machines)

    @property
    def n_states(self) -> int:
        return 2 * self.m


@dataclass(frozen=True, eq=False)
class EquilibriumJet:
    """Taylor k-jet of a field, in coordinates shifted to put ``x_sep`` at the origin."""

    x_sep: np.ndarray
    jet: TruncatedPolyMap
    source: TrigVectorField | None = None
    angle_indices: tuple = ()

    @property
    def k(self) -> int:
        return self.jet.max_degree

    @property
    def n(self) -> int:
        return self.jet.n_vars


def build_swing_field(system: PowerSystem) -> TrigVectorField:
    """Trig field of the swing equations, one ``sin``/``cos`` term per coupling."""
    m = system.m
    if m < 2:
        raise ValueError("need at least two machines")
    n = 2 * m
    const = np.zeros(n)
    lin = np.zeros((n, n))
    terms = []
    net = system.network
    for i, mach in enumerate(system.machines):
        a, w = 2 * i, 2 * i + 1
        gain = system.omega_s / (2 * mach.H)
        lin[a, w] = 1.0
        lin[w, w] = -mach.D / (2 * mach.H)
        const[w] = -gain * (mach.Pm - mach.E**2 * net.G[i])
        for j in range(m):
            if j == i:
                continue
            direction = [0] * n
            direction[a], direction[2 * j] = 1, -1
            if net.C[i, j]:
                terms.append(TrigTerm(w, gain * net.C[i, j], "sin", direction))
            if net.Dij[i, j]:
                terms.append(TrigTerm(w, gain * net.Dij[i, j], "cos", direction))
    return TrigVectorField(const, lin, tuple(terms), tuple(range(0, n, 2)))


def _shift_invariant_directions(field: TrigVectorField, x) -> int:
    """1 if the field is unchanged by a common shift of all angles, else 0."""
    shift = np.zeros(field.n)
    shift[list(field.angle_indices)] = 1.0
    if not field.angle_indices:
        return 0
    same = np.allclose(field(x + 0.37 * shift), field(x), rtol=1e-12, atol=1e-12)
    return int(same)


def find_equilibrium(
    field: TrigVectorField, guess, tol: float = 1e-10, max_iter: int = 50
) -> np.ndarray:
    """Newton iteration to the equilibrium nearest ``guess``.

    Steps are minimum-norm least-squares solutions so the common-angle
    direction of a shift-invariant swing field stays where the guess put it.
    """
    x = np.array(guess, dtype=float)
    free = _shift_invariant_directions(field, x)
    for _ in range(max_iter):
        r = field(x)
        if np.linalg.norm(r) < tol:
            return x
        jac = field.jacobian(x)
        sv = np.linalg.svd(jac, compute_uv=False)
        rank = int(np.sum(sv > 1e-10 * sv[0]))
        if rank < field.n - free:
            raise SingularJacobian(f"Jacobian rank {rank} at {x}")
        step, *_ = np.linalg.lstsq(jac, -r, rcond=1e-10)
        x = x + step
    if np.linalg.norm(field(x)) < tol:
        return x
    raise NoConvergence(f"residual {np.linalg.norm(field(x)):.3e} after {max_iter} iterations")


def make_jet(field: TrigVectorField, x_sep, k: int, tol: float = 1e-8) -> EquilibriumJet:
    """Degree-``k`` jet around ``x_sep`` after checking it is an equilibrium."""
    x_sep = np.asarray(x_sep, dtype=float)
    poly, const = taylor_trig(field, x_sep, k)
    res = float(np.linalg.norm(const))
    if res > tol:
        raise ResidualTooLarge(f"field residual {res:.3e} at x_sep exceeds {tol:.1e}")
    return EquilibriumJet(x_sep, poly, field, tuple(field.angle_indices))


def poly_jet(poly: TruncatedPolyMap, angle_indices=None) -> EquilibriumJet:
    """Wrap a polynomial system already centred at its equilibrium."""
    if angle_indices is None:
        angle_indices = tuple(range(0, poly.n_vars, 2))
    return EquilibriumJet(np.zeros(poly.n_vars), poly, None, tuple(angle_indices))
