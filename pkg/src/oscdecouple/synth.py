"""Random synthetic multi-oscillator systems for property tests and demos."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .poly import TruncatedPolyMap, monomials
from .power import MachineParams, NetworkParams, PowerSystem


@dataclass(frozen=True, eq=False)
class SynthSystem:
    """A polynomial system centred at its equilibrium with known linear spectrum."""

    field: TruncatedPolyMap
    eigenvalues: np.ndarray
    angle_indices: tuple

    @property
    def n(self) -> int:
        return self.field.n_vars


def _min_divisor(lam: np.ndarray, k: int) -> float:
    """Smallest ``|sum m_j lam_j - lam_i|`` over orders 2..k."""
    best = np.inf
    for order in range(2, k + 1):
        for combo in itertools.combinations_with_replacement(range(lam.size), order):
            s = lam[list(combo)].sum()
            best = min(best, float(np.min(np.abs(s - lam))))
    return best


def random_system(
    n_modes: int,
    k: int = 3,
    rng: np.random.Generator | int | None = None,
    sigma=(-0.6, -0.1),
    omega=(1.0, 10.0),
    coupling: float = 0.3,
    coeff_scale: float = 1.0,
    density: float = 0.6,
    min_divisor: float = 0.05,
) -> SynthSystem:
    """Random real system of ``n_modes`` damped oscillators with polynomial nonlinearity.

    Each mode starts as ``x' = v``, ``v' = -|lam|**2 x + 2 sigma v``; the blocks
    are then mixed by a random near-identity change of basis so every mode
    leaks into every state. Nonlinear coefficients of degrees ``2..k`` are
    drawn with probability ``density`` and scaled by ``coeff_scale``.
    Spectra whose smallest decoupling divisor is below
    ``min_divisor * max|lam|`` are redrawn.
    """
    rng = np.random.default_rng(rng)
    n = 2 * n_modes
    for _ in range(100):
        s = rng.uniform(*sigma, size=n_modes)
        w = np.sort(rng.uniform(*omega, size=n_modes))[::-1]
        lam = np.concatenate([[complex(a, b), complex(a, -b)] for a, b in zip(s, w)])
        if _min_divisor(lam, k) >= min_divisor * np.max(np.abs(lam)):
            break
    else:
        raise RuntimeError("could not draw a non-resonant spectrum")
    block = np.zeros((n, n))
    for i, (a, b) in enumerate(zip(s, w)):
        block[2 * i, 2 * i + 1] = 1.0
        block[2 * i + 1, 2 * i] = -(a * a + b * b)
        block[2 * i + 1, 2 * i + 1] = 2 * a
    t = np.eye(n) + coupling * rng.standard_normal((n, n)) / np.sqrt(n)
    a_mat = t @ block @ np.linalg.inv(t)
    nonlinear = []
    for _ in range(n):
        poly = {}
        for d in range(2, k + 1):
            for e in monomials(n, d):
                if rng.random() < density:
                    poly[e] = coeff_scale * rng.standard_normal() / d
        nonlinear.append(poly)
    field = TruncatedPolyMap(a_mat, tuple(nonlinear), k)
    return SynthSystem(field, lam, tuple(range(0, n, 2)))


def random_swing_system(
    m: int,
    rng: np.random.Generator | int | None = None,
    damping_ratio: float = 0.5,
    omega_s: float = 2 * np.pi * 60,
    spread: float = 0.4,
) -> tuple[PowerSystem, np.ndarray]:
    """Random ``m``-machine swing system and an equilibrium state of it.

    Couplings are synchronizing (``C_ij < 0`` in this sign convention) and
    symmetric. Mechanical powers are chosen so that random angles within
    ``spread`` radians of each other are an exact equilibrium with zero speeds.
    """
    rng = np.random.default_rng(rng)
    h = rng.uniform(2.0, 10.0, size=m)
    e = rng.uniform(1.0, 1.1, size=m)
    c = -rng.uniform(0.5, 2.0, size=(m, m))
    c = 0.5 * (c + c.T)
    dij = rng.uniform(0.0, 0.3, size=(m, m))
    dij = 0.5 * (dij + dij.T)
    np.fill_diagonal(c, 0.0)
    np.fill_diagonal(dij, 0.0)
    g = rng.uniform(0.0, 0.5, size=m)
    delta = rng.uniform(0.0, spread, size=m)
    delta -= delta[0]
    pm = np.empty(m)
    for i in range(m):
        diff = delta[i] - delta
        pm[i] = e[i] ** 2 * g[i] + np.sum(c[i] * np.sin(diff) + dij[i] * np.cos(diff))
    machines = tuple(MachineParams(h[i], 2 * h[i] * damping_ratio, pm[i], e[i]) for i in range(m))
    system = PowerSystem(machines, NetworkParams(g, c, dij), omega_s)
    x = np.zeros(2 * m)
    x[0::2] = delta
    return system, x
