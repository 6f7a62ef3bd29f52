"""Real second-order oscillators built from decoupled complex mode pairs.

Mode ``i`` of a decoupled jet is mapped to ``w1 = s (lam1 z1 + lam2 z2)`` (speed
like) and ``w2 = s (z1 + z2)`` (displacement like), giving

    w1' = sum u_jl w1**j w2**l,    w2' = w1 + sum v_jl w1**j w2**l.

Coefficients are stored as dicts keyed by ``(j, l)``. The scale ``s`` defaults
to 1/2, which makes ``w2`` the real part of ``z1``; with ``s = 1`` the degree-n
coefficients are ``2**(n - 1)`` times smaller.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DecouplingError, ImaginaryResidue
from .poly import TruncatedPolyMap, compose_truncated, conjugate_partner, linear_map


@dataclass(frozen=True, eq=False)
class DecoupledOscillator:
    mode: int
    lam: tuple
    velocity: dict
    displacement: dict
    k: int
    target: str = "st"
    simplified: bool = False
    meta: dict = field(default_factory=dict)

    def force_coefficients(self) -> np.ndarray:
        """``v[j - 1]``: coefficient of ``w2**j`` in the velocity equation."""
        return np.array([self.velocity.get((0, j), 0.0) for j in range(1, self.k + 1)])

    def linearization(self) -> np.ndarray:
        return np.array(
            [
                [self.velocity.get((1, 0), 0.0), self.velocity.get((0, 1), 0.0)],
                [self.displacement.get((1, 0), 0.0), self.displacement.get((0, 1), 0.0)],
            ]
        )

    def as_map(self) -> TruncatedPolyMap:
        return TruncatedPolyMap.from_components([self.velocity, self.displacement], 2, self.k)

    def __call__(self, w):
        return self.as_map()(w).real


def mode_uw(lam1: complex, lam2: complex) -> np.ndarray:
    """``w = U z`` for one mode: rows give the speed and displacement coordinates."""
    return np.array([[lam1, lam2], [1.0, 1.0]], dtype=complex)


REAL_SCALE = 0.5


def mode_state(z, basis, mode: int, scale: float = REAL_SCALE) -> np.ndarray:
    """Real ``(w1, w2)`` of one mode from decoupled coordinates ``z`` (``(N,)`` or ``(N, B)``)."""
    a, b = basis.mode_groups[mode]
    u = scale * mode_uw(complex(basis.eigenvalues[a]), complex(basis.eigenvalues[b]))
    z = np.asarray(z, dtype=complex)
    return (u @ np.stack([z[a], z[b]])).real


def to_real(
    djet, mode: int, scale: float = REAL_SCALE, tol: float = 1e-8
) -> DecoupledOscillator:
    """Real ``(w1, w2)`` form of one decoupled mode, ``w = scale * U_mode z``."""
    if scale <= 0:
        raise ValueError("scale must be positive")
    a, b = djet.basis.mode_groups[mode]
    lam1, lam2 = complex(djet.eigenvalues[a]), complex(djet.eigenvalues[b])
    first = djet.mode_equation(mode)
    pair = TruncatedPolyMap.from_components([first, conjugate_partner(first)], 2, djet.k)
    u = scale * mode_uw(lam1, lam2)
    in_w = compose_truncated(pair, linear_map(np.linalg.inv(u), djet.k), djet.k)
    real_form = in_w.left_multiply(u)
    comps = real_form.components()
    size = max([1.0] + [abs(c) for poly in comps for c in poly.values()])
    for poly in comps:
        for c in poly.values():
            if abs(c.imag) > tol * size:
                raise ImaginaryResidue(f"mode {mode} coefficient {c} is not real")
    vel = {e: c.real for e, c in comps[0].items()}
    disp = {e: c.real for e, c in comps[1].items()}
    return DecoupledOscillator(
        mode, (lam1, lam2), vel, disp, djet.k, djet.target.variant, meta={"scale": scale}
    )


def simplify_undamped(osc: DecoupledOscillator) -> DecoupledOscillator:
    """Keep ``w1' = sum_j v_j w2**j`` and ``w2' = w1``, dropping damping and mixed terms."""
    vel = {e: c for e, c in osc.velocity.items() if e[0] == 0 and e[1] >= 1}
    return DecoupledOscillator(
        osc.mode, osc.lam, vel, {(1, 0): 1.0}, osc.k, osc.target, True, dict(osc.meta)
    )


def smib_realize(target, mode: int, k: int) -> DecoupledOscillator:
    """``w1' = -alpha w1 - sum_n r_n w2**n``, ``w2' = w1`` for an SMIB target."""
    if target.variant != "smib":
        raise DecouplingError(f"expected an smib target, got {target.variant!r}")
    params = target.smib[mode]
    if len(params.r) < k:
        raise DecouplingError(f"target only carries degrees up to {len(params.r)}")
    vel = {(1, 0): -params.alpha}
    for n in range(1, k + 1):
        vel[(0, n)] = -params.r[n - 1]
    lam1 = params.lam
    return DecoupledOscillator(
        mode, (lam1, np.conj(lam1)), vel, {(1, 0): 1.0}, k, "smib",
        meta={"y_s": params.y_s, "beta": params.beta},
    )
