"""Eigen-decomposition, left-eigenvector normalization and modal coordinates."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace

import numpy as np
import scipy.linalg

from .errors import (
    AmbiguousGrouping,
    DecouplingError,
    DefectiveMatrix,
    UnpairedComplexEigenvalue,
)
from .poly import (
    TruncatedPolyMap,
    compose_truncated,
    enforce_conjugate_closure,
    linear_map,
)

PAIR_RTOL = 1e-6
COND_LIMIT = 1e8
GROUP_AXIS_TOL = 1e-3


@dataclass(frozen=True, eq=False)
class ModalBasis:
    """Retained oscillatory modes of a linearization.

    ``eigenvalues`` come in conjugate pairs ``(lam, conj(lam))`` with
    ``Im(lam) > 0``, ordered by descending frequency. ``U`` holds the matching
    right eigenvectors as columns; ``U_inv_rows`` the left eigenvectors as rows,
    scaled so that ``U_inv_rows @ U`` is the identity.
    """

    eigenvalues: np.ndarray
    U: np.ndarray
    U_inv_rows: np.ndarray
    dropped: tuple = ()
    dropped_eigenvalues: np.ndarray = None
    angle_indices: tuple = ()
    mode_groups: tuple = None
    normalized: bool = False

    def __post_init__(self):
        lam = np.asarray(self.eigenvalues, dtype=complex)
        object.__setattr__(self, "eigenvalues", lam)
        object.__setattr__(self, "U", np.asarray(self.U, dtype=complex))
        object.__setattr__(self, "U_inv_rows", np.asarray(self.U_inv_rows, dtype=complex))
        if self.dropped_eigenvalues is None:
            object.__setattr__(self, "dropped_eigenvalues", np.zeros(0, dtype=complex))
        if self.mode_groups is None:
            groups = tuple((i, i + 1) for i in range(0, lam.size, 2))
            object.__setattr__(self, "mode_groups", groups)

    @property
    def n_retained(self) -> int:
        return self.eigenvalues.size

    @property
    def n_modes(self) -> int:
        return len(self.mode_groups)

    @property
    def n_states(self) -> int:
        return self.U.shape[0]

    @property
    def conjugate_pairs(self) -> bool:
        return all(len(g) == 2 for g in self.mode_groups)

    def mode_of(self, var: int) -> int:
        for m, g in enumerate(self.mode_groups):
            if var in g:
                return m
        raise IndexError(var)

    def pair(self, mode: int) -> tuple[complex, complex]:
        a, b = self.mode_groups[mode]
        return complex(self.eigenvalues[a]), complex(self.eigenvalues[b])

    def projector(self) -> np.ndarray:
        """Real projector onto the retained subspace, along the dropped modes."""
        return (self.U @ self.U_inv_rows).real

    def frequencies(self) -> np.ndarray:
        return np.array([abs(self.eigenvalues[g[0]].imag) for g in self.mode_groups])


@dataclass(frozen=True)
class Resonance:
    target_index: int
    multipliers: tuple
    order: int
    residual: float
    exact: bool


def _linear_part(jet) -> tuple[np.ndarray, tuple | None]:
    angle_indices = getattr(jet, "angle_indices", None)
    if hasattr(jet, "jet"):
        jet = jet.jet
    if isinstance(jet, TruncatedPolyMap):
        a = jet.linear
    else:
        a = np.asarray(jet)
    if np.iscomplexobj(a):
        if np.max(np.abs(a.imag), initial=0.0) > 1e-12 * max(1.0, np.max(np.abs(a))):
            raise DecouplingError("linearization must be real")
        a = a.real
    return np.asarray(a, dtype=float), angle_indices


def eigendecompose(jet, angle_indices=None) -> ModalBasis:
    """Pair the complex eigenvalues of the jet's linear part and drop real ones.

    ``jet`` may be an :class:`EquilibriumJet`, a :class:`TruncatedPolyMap` or a
    plain matrix.
    """
    a, jet_angles = _linear_part(jet)
    if angle_indices is None:
        angle_indices = jet_angles if jet_angles is not None else tuple(range(0, a.shape[0], 2))
    lam, vecs = scipy.linalg.eig(a)
    if np.linalg.cond(vecs) > COND_LIMIT:
        raise DefectiveMatrix("eigenvector matrix is (nearly) singular")
    scale = max(1.0, float(np.max(np.abs(lam))))
    im_tol = 1e-9 * scale
    upper = [i for i in range(lam.size) if lam[i].imag > im_tol]
    lower = [i for i in range(lam.size) if lam[i].imag < -im_tol]
    real = [i for i in range(lam.size) if abs(lam[i].imag) <= im_tol]
    for i in upper:
        target = np.conj(lam[i])
        match = [j for j in lower if abs(lam[j] - target) <= PAIR_RTOL * abs(lam[i])]
        if not match:
            raise UnpairedComplexEigenvalue(f"no conjugate partner for {lam[i]}")
        lower.remove(min(match, key=lambda j: abs(lam[j] - target)))
    if lower:
        raise UnpairedComplexEigenvalue(f"no conjugate partner for {lam[lower[0]]}")
    upper.sort(key=lambda i: -lam[i].imag)

    cols, eigs = [], []
    for i in upper:
        cols += [vecs[:, i], np.conj(vecs[:, i])]
        eigs += [lam[i], np.conj(lam[i])]
    for i in real:
        cols.append(vecs[:, i].astype(complex))
    full = np.column_stack(cols)
    inv = np.linalg.inv(full)
    n = 2 * len(upper)
    rows = inv[:n].copy()
    rows[1::2] = np.conj(rows[0::2])
    return ModalBasis(
        eigenvalues=np.array(eigs, dtype=complex),
        U=full[:, :n],
        U_inv_rows=rows,
        dropped=tuple(real),
        dropped_eigenvalues=lam[real].astype(complex),
        angle_indices=tuple(angle_indices),
    )


ORIENTATIONS = ("participation", "left")


def _group_sum(displacement: np.ndarray, big: int) -> complex:
    rel = np.angle(displacement / displacement[big])
    live = np.abs(displacement) > 1e-12 * np.max(np.abs(displacement))
    if np.any(live & (np.abs(np.abs(rel) - np.pi / 2) < GROUP_AXIS_TOL)):
        raise AmbiguousGrouping("a displacement entry lies on the group split axis")
    return complex(np.sum(displacement[live & (np.abs(rel) < np.pi / 2)]))


def normalize_basis(basis: ModalBasis, orient: str = "participation") -> ModalBasis:
    """Scale each left eigenvector so one group of its displacement entries sums to 1.

    The displacement entries are split into two opposing groups by the line
    perpendicular to a reference entry, and the vector is divided by the sum of
    the group holding that entry. The reference is the displacement state with
    the largest participation factor ``|left_j * right_j|`` (``orient="participation"``)
    or the largest left-eigenvector entry (``orient="left"``). For swing systems
    the two group sums are negatives of each other, so the choice only fixes the
    sign of the mode coordinate.

    Right eigenvectors are rescaled to keep ``U_inv_rows @ U = I``.
    """
    if orient not in ORIENTATIONS:
        raise ValueError(f"orient must be one of {ORIENTATIONS}, got {orient!r}")
    idx = list(basis.angle_indices)
    if not idx:
        raise ValueError("basis has no displacement (angle) indices")
    rows = basis.U_inv_rows.copy()
    cols = basis.U.copy()
    for group in basis.mode_groups:
        lead = group[0]
        left = rows[lead, idx]
        if orient == "left":
            weight = np.abs(left)
        else:
            weight = np.abs(left * cols[idx, lead])
        s = _group_sum(left, int(np.argmax(weight)))
        rows[lead] /= s
        cols[:, lead] *= s
        if len(group) == 2:
            mate = group[1]
            rows[mate] = np.conj(rows[lead])
            cols[:, mate] = np.conj(cols[:, lead])
    return replace(basis, U=cols, U_inv_rows=rows, normalized=True)


def to_modal(jet, basis: ModalBasis, k: int | None = None) -> TruncatedPolyMap:
    """Jet in modal coordinates, ``z' = U_inv_rows F(U z)``, with diagonal linear part."""
    poly = jet.jet if hasattr(jet, "jet") else jet
    if k is None:
        k = poly.max_degree
    modal = compose_truncated(poly, linear_map(basis.U, k), k).left_multiply(basis.U_inv_rows)
    lam = basis.eigenvalues
    off = modal.linear - np.diag(np.diag(modal.linear))
    scale = max(1.0, float(np.max(np.abs(lam))))
    if np.max(np.abs(off), initial=0.0) > 1e-6 * scale:
        raise DecouplingError("basis does not diagonalize this jet")
    modal = modal.with_linear(np.diag(lam))
    if basis.conjugate_pairs:
        modal = enforce_conjugate_closure(modal)
    return modal


def check_resonance(eigs, k: int, tol: float) -> list[Resonance]:
    """All relations ``lam_s ~ sum m_j lam_j`` with ``2 <= sum m <= k``.

    Relations within ``tol`` are flagged exact; those within ``100 * tol`` are
    returned as near-resonances with ``exact=False``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    lam = np.asarray(eigs, dtype=complex)
    n = lam.size
    found = []
    for order in range(2, k + 1):
        for combo in itertools.combinations_with_replacement(range(n), order):
            total = lam[list(combo)].sum()
            mult = [0] * n
            for j in combo:
                mult[j] += 1
            for s in range(n):
                r = float(abs(lam[s] - total))
                if r < 100 * tol:
                    found.append(Resonance(s, tuple(mult), order, r, r < tol))
    return found
