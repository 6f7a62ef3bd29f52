"""Order-by-order elimination of inter-modal terms.

At each degree ``p + 1`` a near-identity change of variables
``z = u + h(u)`` with ``h`` homogeneous of degree ``p + 1`` removes every
inter-modal monomial of that degree. Intra-modal monomials are shaped by an
:class:`IntraModalTarget`:

* ``st``   keeps them as they are (``h_intra = 0``),
* ``nf``   removes them too (classic normal form),
* ``smib`` replaces them with the terms of a single-machine-infinite-bus swing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    CosineSingular,
    DecouplingError,
    ImaginaryResidue,
    PreconditionNotDecoupled,
    SmallDivisor,
)
from .modal import ModalBasis, normalize_basis, to_modal
from .poly import (
    ZERO_TOL,
    TruncatedPolyMap,
    enforce_conjugate_closure,
    homogeneous_part,
    invert_near_identity,
    jacobian_polys,
    linear_map,
    compose_truncated,
    poly_add,
    poly_eval,
    poly_mul,
)

GUARD_RTOL = 1e-6
VARIANTS = ("smib", "st", "nf")
TRANSFERS = ("exact", "first_order")


@dataclass(frozen=True)
class SmibParams:
    """Single-machine-infinite-bus shape for one mode.

    ``r[n - 1]`` is the coefficient of ``y**n`` in ``y'' + alpha y' + sum r_n y**n = 0``
    and ``mu`` maps local exponents ``(a, b)`` to the coefficient of
    ``z1**a z2**b`` in the first equation of the complex pair.
    """

    alpha: float
    beta: float
    y_s: float
    lam: complex
    r: tuple
    mu: dict = field(default_factory=dict)


@dataclass(frozen=True)
class IntraModalTarget:
    variant: str
    smib: tuple = ()

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if self.variant == "smib" and not self.smib:
            raise ValueError("an smib target needs per-mode parameters")

    @classmethod
    def st(cls) -> "IntraModalTarget":
        return cls("st")

    @classmethod
    def nf(cls) -> "IntraModalTarget":
        return cls("nf")

    def intra_coefficient(self, component: int, exponents, basis: ModalBasis) -> complex:
        """Desired coefficient of an intra-modal monomial (not used for ``st``)."""
        if self.variant != "smib":
            return 0.0
        mode = basis.mode_of(component)
        a, b = basis.mode_groups[mode]
        params = self.smib[mode]
        if component == a:
            return params.mu.get((exponents[a], exponents[b]), 0.0)
        return np.conj(params.mu.get((exponents[b], exponents[a]), 0.0))

    def desired_terms(self, component: int, d: int, basis: ModalBasis) -> dict:
        """Nonzero desired intra-modal terms of degree ``d`` for ``component``."""
        if self.variant != "smib":
            return {}
        mode = basis.mode_of(component)
        a, b = basis.mode_groups[mode]
        n = basis.n_retained
        out = {}
        for (pa, pb) in self.smib[mode].mu:
            if pa + pb != d:
                continue
            e = [0] * n
            if component == a:
                e[a], e[b] = pa, pb
            else:
                e[a], e[b] = pb, pa
            e = tuple(e)
            out[e] = self.intra_coefficient(component, e, basis)
        return out


def build_smib_target(basis: ModalBasis, x_sep, k: int) -> IntraModalTarget:
    """SMIB target from the normalized left eigenvectors and steady-state angles.

    ``y_s`` of mode ``i`` is the real part of ``sum_j tau_ij * delta_js`` where
    ``tau`` are the normalized displacement entries of the mode's left
    eigenvector and ``delta_js`` the angles of ``x_sep``. The generalized angle
    of the mode is identified with ``w2 = z1 + z2`` and its speed with
    ``w1 = lam1 z1 + lam2 z2``.
    """
    if not basis.normalized:
        basis = normalize_basis(basis)
    x_sep = np.asarray(x_sep, dtype=float)
    idx = list(basis.angle_indices)
    params = []
    for mode, (a, b) in enumerate(basis.mode_groups):
        lam1, lam2 = complex(basis.eigenvalues[a]), complex(basis.eigenvalues[b])
        tau = basis.U_inv_rows[a, idx]
        y_s = float(np.real(np.sum(tau * x_sep[idx])))
        if abs(math.cos(y_s)) < 1e-6:
            raise CosineSingular(f"cos(y_s) vanishes for mode {mode}")
        alpha = -2.0 * lam1.real
        beta = (lam1 * lam2).real / math.cos(y_s)
        r = tuple(
            beta * math.cos(y_s + (n - 1) * math.pi / 2) / math.factorial(n)
            for n in range(1, k + 1)
        )
        mu = {}
        for n in range(2, k + 1):
            for pa in range(n + 1):
                c = -r[n - 1] * math.comb(n, pa) / (lam1 - lam2)
                if abs(c) >= ZERO_TOL:
                    mu[(pa, n - pa)] = c
        params.append(SmibParams(alpha, beta, y_s, lam1, r, mu))
    return IntraModalTarget("smib", tuple(params))


def _is_intra(component: int, exponents, basis: ModalBasis) -> bool:
    group = basis.mode_groups[basis.mode_of(component)]
    return all(p == 0 or j in group for j, p in enumerate(exponents))


def decouple_step(
    system: TruncatedPolyMap,
    target: IntraModalTarget,
    p: int,
    basis: ModalBasis,
    transfer: str = "exact",
) -> tuple[TruncatedPolyMap, TruncatedPolyMap]:
    """Remove the inter-modal terms of degree ``p + 1``.

    Returns the transformed system and the step map ``H = id + h``. The new
    field ``V`` solves ``(I + Dh(u)) V(u) = G(u + h(u))``. With
    ``transfer="exact"`` this is solved degree by degree,
    ``V_d = [G o H]_d - Dh . V_(d-p)``, so the result is k-jet equivalent to
    the input. ``transfer="first_order"`` uses ``(I + Dh)^-1 ~ I - Dh``,
    i.e. ``V_d = [G o H]_d - Dh . [G o H]_(d-p)``, which drops terms such as
    ``Dh . Dh . Lambda u`` from degree ``2p + 1`` upward.
    """
    if transfer not in TRANSFERS:
        raise ValueError(f"transfer must be one of {TRANSFERS}, got {transfer!r}")
    lam = basis.eigenvalues
    n = lam.size
    k = system.max_degree
    if system.n_vars != n or system.n_out != n:
        raise DecouplingError("system and basis dimensions differ")
    guard = GUARD_RTOL * float(np.max(np.abs(lam)))
    for i, poly in enumerate(system.nonlinear):
        for e in poly:
            if sum(e) <= p and not _is_intra(i, e, basis):
                raise PreconditionNotDecoupled(
                    f"component {i} still has inter-modal term {e} of degree {sum(e)}"
                )

    h = []
    desired = []
    for i in range(n):
        current = homogeneous_part(system.nonlinear[i], p + 1)
        wanted = target.desired_terms(i, p + 1, basis)
        hi = {}
        for e in set(current) | set(wanted):
            c = current.get(e, 0.0)
            if _is_intra(i, e, basis):
                if target.variant == "st":
                    continue
                num = c - wanted.get(e, 0.0)
            else:
                num = c
            if abs(num) < ZERO_TOL:
                continue
            div = complex(np.dot(e, lam) - lam[i])
            if abs(div) < guard:
                raise SmallDivisor(i, e, div)
            hi[e] = num / div
        h.append(hi)
        desired.append(wanted)

    step = TruncatedPolyMap(np.eye(n), tuple(h), k)
    if not any(h):
        return system, step

    composed = compose_truncated(system, step, k)
    dh = jacobian_polys(TruncatedPolyMap(np.zeros((n, n)), tuple(h), k))
    v = composed.components()
    source = v if transfer == "exact" else composed.components()
    for d in range(p + 1, k + 1):
        for i in range(n):
            corr: dict = {}
            for l in range(n):
                if not dh[i][l]:
                    continue
                part = homogeneous_part(source[l], d - p)
                if part:
                    corr = poly_add(corr, poly_mul(dh[i][l], part, k))
            if corr:
                v[i] = poly_add(v[i], corr, -1.0)

    # Pin degree p+1 to its exact target: inter-modal terms removed, intra set.
    scale = max(1.0, max((abs(c) for poly in system.nonlinear for c in poly.values()), default=1.0))
    for i in range(n):
        for e in [e for e in v[i] if sum(e) == p + 1]:
            if _is_intra(i, e, basis):
                if target.variant != "st":
                    v[i][e] = desired[i].get(e, 0.0)
            else:
                if abs(v[i][e]) > 1e-6 * scale:
                    raise DecouplingError(f"elimination failed for component {i}, term {e}")
                del v[i][e]
        for e, c in desired[i].items():
            v[i].setdefault(e, c)
    new = TruncatedPolyMap.from_components(v, n, k).with_linear(np.diag(lam))
    if basis.conjugate_pairs:
        new = enforce_conjugate_closure(new)
        step = enforce_conjugate_closure(step)
    return new, step


@dataclass(frozen=True, eq=False)
class DecoupledJet:
    """Decoupled k-jet in complex modal coordinates."""

    system: TruncatedPolyMap
    basis: ModalBasis
    target: IntraModalTarget

    @property
    def eigenvalues(self) -> np.ndarray:
        return self.basis.eigenvalues

    @property
    def k(self) -> int:
        return self.system.max_degree

    def mode_equation(self, mode: int) -> dict:
        """Coefficients of the first equation of ``mode`` keyed by local exponents."""
        a, b = self.basis.mode_groups[mode]
        out = {}
        for e, c in self.system.component(a).items():
            out[(e[a], e[b])] = c
        return out

    def inter_modal_terms(self) -> list[tuple[int, tuple]]:
        return [
            (i, e)
            for i, poly in enumerate(self.system.nonlinear)
            for e in poly
            if not _is_intra(i, e, self.basis)
        ]


@dataclass(frozen=True, eq=False)
class TransformChain:
    """``x = U (H_2 o H_3 o ... o H_k)(z)`` and its truncated series inverse."""

    modal: TruncatedPolyMap
    modal_inverse: np.ndarray
    steps: tuple
    inverse_steps: tuple
    k: int

    @property
    def n_states(self) -> int:
        return self.modal.n_out

    @property
    def n_modal(self) -> int:
        return self.modal.n_vars


def forward_map(chain: TransformChain, z, tol: float = 1e-8) -> np.ndarray:
    """Original-space state (relative to the equilibrium) for decoupled coordinates ``z``.

    Accepts ``(N,)`` or ``(N, batch)``.
    """
    x = np.asarray(z, dtype=complex)
    for step in reversed(chain.steps):
        x = step(x)
    x = chain.modal(x)
    size = np.maximum(1.0, np.max(np.abs(x), axis=0))
    if np.any(np.max(np.abs(x.imag), axis=0) > tol * size):
        raise ImaginaryResidue("forward map produced a complex state")
    return x.real


def inverse_map(chain: TransformChain, x) -> np.ndarray:
    """Decoupled coordinates for an original-space state via the series inverses.

    Components of ``x`` along dropped (non-oscillatory) modes are discarded.
    """
    z = chain.modal_inverse @ np.asarray(x, dtype=complex)
    for inv in chain.inverse_steps:
        z = inv(z)
    return z


def run_decoupling(
    jet, basis: ModalBasis, target: IntraModalTarget, k: int, transfer: str = "exact"
) -> tuple[DecoupledJet, TransformChain]:
    """Decouple ``jet`` through degree ``k`` and return the jet and transform chain."""
    system = to_modal(jet, basis, k)
    steps = []
    for p in range(1, k):
        system, step = decouple_step(system, target, p, basis, transfer)
        steps.append(step)
    inverses = tuple(invert_near_identity(s, k) for s in steps)
    chain = TransformChain(
        modal=linear_map(basis.U, k),
        modal_inverse=basis.U_inv_rows,
        steps=tuple(steps),
        inverse_steps=inverses,
        k=k,
    )
    return DecoupledJet(system, basis, target), chain


def chain_polynomial(chain: TransformChain) -> TruncatedPolyMap:
    """The full forward map ``U (H_2 o ... o H_k)`` as one degree-``k`` polynomial map."""
    acc = chain.modal
    for step in chain.steps:
        acc = compose_truncated(acc, step, chain.k)
    return acc


def semiconjugacy_residual(jet, djet: DecoupledJet, chain: TransformChain, z) -> float:
    """``|DH(z) G(z) - F(H(z))|`` for decoupled field ``G``, original jet ``F`` and forward map ``H``.

    Vanishes to order ``k + 1`` in ``|z|`` when the decoupling is k-jet exact.
    """
    poly = jet.jet if hasattr(jet, "jet") else jet
    h_map = chain_polynomial(chain)
    jac = jacobian_polys(h_map)
    z = np.asarray(z, dtype=complex)
    dh = np.array([[poly_eval(jac[i][l], z) for l in range(h_map.n_vars)] for i in range(h_map.n_out)])
    lhs = dh @ djet.system(z)
    rhs = poly.truncated(chain.k)(h_map(z))
    return float(np.linalg.norm(lhs - rhs))
