"""Truncated multivariate polynomial maps with complex coefficients.

A polynomial is a plain ``dict`` mapping an exponent tuple to a complex
coefficient; ``(2, 0, 1)`` stands for ``z0**2 * z2``. A
:class:`TruncatedPolyMap` keeps the degree-1 part as a dense matrix and the
degree ``2..k`` part as one sparse dict per output component. Everything here
is double-precision complex; coefficients below :data:`ZERO_TOL` are dropped.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property
from types import MappingProxyType

import numpy as np

from .errors import DimensionMismatch, NotNearIdentity

ZERO_TOL = 1e-12


def monomial_count(n_vars: int, degree: int) -> int:
    """Number of monomials of exact total ``degree`` in ``n_vars`` variables."""
    if n_vars < 1 or degree < 0:
        raise ValueError("need n_vars >= 1 and degree >= 0")
    return math.comb(n_vars + degree - 1, degree)


def monomials(n_vars: int, degree: int) -> list[tuple[int, ...]]:
    """All exponent tuples of total ``degree``, in descending lexicographic order."""
    out = []
    for combo in itertools.combinations_with_replacement(range(n_vars), degree):
        e = [0] * n_vars
        for j in combo:
            e[j] += 1
        out.append(tuple(e))
    return sorted(out, reverse=True)


def unit(n_vars: int, j: int) -> tuple[int, ...]:
    e = [0] * n_vars
    e[j] = 1
    return tuple(e)


def degree(exponents) -> int:
    return sum(exponents)


# ---------------------------------------------------------------------------
# dict-level algebra


def prune(poly: dict, tol: float = ZERO_TOL) -> dict:
    return {e: c for e, c in poly.items() if abs(c) >= tol}


def poly_add(a: dict, b: dict, scale: complex = 1.0) -> dict:
    """Return ``a + scale * b``."""
    out = dict(a)
    for e, c in b.items():
        out[e] = out.get(e, 0.0) + scale * c
    return prune(out)


def poly_scale(a: dict, s: complex) -> dict:
    return prune({e: s * c for e, c in a.items()})


def poly_mul(a: dict, b: dict, max_degree: int) -> dict:
    """Product of two polynomials with every term above ``max_degree`` discarded."""
    if not a or not b:
        return {}
    b_items = [(eb, cb, sum(eb)) for eb, cb in b.items()]
    out: dict = {}
    for ea, ca in a.items():
        room = max_degree - sum(ea)
        if room < 0:
            continue
        for eb, cb, db in b_items:
            if db > room:
                continue
            e = tuple(x + y for x, y in zip(ea, eb))
            out[e] = out.get(e, 0.0) + ca * cb
    return prune(out)


def poly_deriv(a: dict, var: int) -> dict:
    out = {}
    for e, c in a.items():
        p = e[var]
        if p == 0:
            continue
        e2 = list(e)
        e2[var] -= 1
        out[tuple(e2)] = c * p
    return out


def homogeneous_part(a: dict, d: int) -> dict:
    return {e: c for e, c in a.items() if sum(e) == d}


def poly_eval(a: dict, point) -> complex:
    total = 0.0
    for e, c in a.items():
        term = c
        for x, p in zip(point, e):
            if p:
                term *= x**p
        total += term
    return total


def swap_pairs(exponents) -> tuple[int, ...]:
    """Swap the exponents of each variable pair ``(2i, 2i+1)``."""
    e = list(exponents)
    for i in range(0, len(e) - 1, 2):
        e[i], e[i + 1] = e[i + 1], e[i]
    return tuple(e)


def conjugate_partner(poly: dict) -> dict:
    """Coefficients of the conjugate-pair partner component."""
    return {swap_pairs(e): np.conj(c) for e, c in poly.items()}


# ---------------------------------------------------------------------------
# maps


@dataclass(frozen=True, eq=False)
class TruncatedPolyMap:
    """Vector of polynomials truncated at ``max_degree``, with no constant term.

    ``linear`` is ``n_out x n_vars``. ``nonlinear[i]`` maps exponent tuples of
    degree ``2..max_degree`` to the coefficients of output component ``i``.
    """

    linear: np.ndarray
    nonlinear: tuple
    max_degree: int

    def __post_init__(self):
        lin = np.array(self.linear, dtype=complex)
        if lin.ndim != 2:
            raise DimensionMismatch("linear part must be a matrix")
        lin.setflags(write=False)
        n_out, n_vars = lin.shape
        if len(self.nonlinear) != n_out:
            raise DimensionMismatch(
                f"{len(self.nonlinear)} nonlinear components for {n_out} outputs"
            )
        comps = []
        for poly in self.nonlinear:
            clean = {}
            for e, c in poly.items():
                e = tuple(int(p) for p in e)
                if len(e) != n_vars:
                    raise DimensionMismatch(f"exponent {e} has wrong length")
                d = sum(e)
                if d < 2:
                    raise ValueError("nonlinear part only holds degrees >= 2")
                if d <= self.max_degree and abs(c) >= ZERO_TOL:
                    clean[e] = complex(c)
            comps.append(MappingProxyType(clean))
        object.__setattr__(self, "linear", lin)
        object.__setattr__(self, "nonlinear", tuple(comps))

    # -- construction -------------------------------------------------------

    @classmethod
    def from_components(cls, comps, n_vars: int, max_degree: int) -> "TruncatedPolyMap":
        """Build from full polynomials (degree-1 terms go to the matrix).

        Constant terms are not representable and raise ``ValueError``.
        """
        lin = np.zeros((len(comps), n_vars), dtype=complex)
        nl = []
        for i, poly in enumerate(comps):
            rest = {}
            for e, c in poly.items():
                d = sum(e)
                if d == 0:
                    if abs(c) >= ZERO_TOL:
                        raise ValueError("constant terms are not allowed")
                    continue
                if d == 1:
                    lin[i, e.index(1)] += c
                elif d <= max_degree:
                    rest[e] = c
            nl.append(rest)
        return cls(lin, tuple(nl), max_degree)

    @classmethod
    def from_linear(cls, matrix, max_degree: int) -> "TruncatedPolyMap":
        m = np.asarray(matrix)
        return cls(m, tuple({} for _ in range(m.shape[0])), max_degree)

    @classmethod
    def identity(cls, n: int, max_degree: int) -> "TruncatedPolyMap":
        return cls.from_linear(np.eye(n), max_degree)

    @classmethod
    def zero(cls, n: int, max_degree: int) -> "TruncatedPolyMap":
        return cls.from_linear(np.zeros((n, n)), max_degree)

    # -- inspection ---------------------------------------------------------

    @property
    def n_vars(self) -> int:
        return self.linear.shape[1]

    @property
    def n_out(self) -> int:
        return self.linear.shape[0]

    def component(self, i: int) -> dict:
        """Full polynomial (linear and nonlinear terms) of output ``i``."""
        out = {}
        for j in np.flatnonzero(np.abs(self.linear[i]) >= ZERO_TOL):
            out[unit(self.n_vars, int(j))] = complex(self.linear[i, j])
        out.update(self.nonlinear[i])
        return out

    def components(self) -> list[dict]:
        return [self.component(i) for i in range(self.n_out)]

    def homogeneous(self, i: int, d: int) -> dict:
        if d == 1:
            return homogeneous_part(self.component(i), 1)
        return homogeneous_part(self.nonlinear[i], d)

    def is_linear(self) -> bool:
        return not any(self.nonlinear)

    def max_nonlinear_degree(self) -> int:
        degs = [sum(e) for poly in self.nonlinear for e in poly]
        return max(degs, default=1)

    def truncated(self, k: int) -> "TruncatedPolyMap":
        return TruncatedPolyMap(self.linear, self.nonlinear, k)

    def with_linear(self, matrix) -> "TruncatedPolyMap":
        return TruncatedPolyMap(matrix, self.nonlinear, self.max_degree)

    def nonlinear_only(self) -> "TruncatedPolyMap":
        return TruncatedPolyMap(np.zeros_like(self.linear), self.nonlinear, self.max_degree)

    def left_multiply(self, matrix) -> "TruncatedPolyMap":
        """The map ``x -> matrix @ self(x)``."""
        m = np.asarray(matrix, dtype=complex)
        if m.shape[1] != self.n_out:
            raise DimensionMismatch("matrix width does not match map outputs")
        nl = []
        for r in range(m.shape[0]):
            acc: dict = {}
            for i in np.flatnonzero(np.abs(m[r]) > 0):
                for e, c in self.nonlinear[i].items():
                    acc[e] = acc.get(e, 0.0) + m[r, i] * c
            nl.append(prune(acc))
        return TruncatedPolyMap(m @ self.linear, tuple(nl), self.max_degree)

    def __add__(self, other: "TruncatedPolyMap") -> "TruncatedPolyMap":
        if self.linear.shape != other.linear.shape:
            raise DimensionMismatch("maps have different shapes")
        nl = tuple(poly_add(a, b) for a, b in zip(self.nonlinear, other.nonlinear))
        return TruncatedPolyMap(
            self.linear + other.linear, nl, max(self.max_degree, other.max_degree)
        )

    def __sub__(self, other: "TruncatedPolyMap") -> "TruncatedPolyMap":
        if self.linear.shape != other.linear.shape:
            raise DimensionMismatch("maps have different shapes")
        nl = tuple(poly_add(a, b, -1.0) for a, b in zip(self.nonlinear, other.nonlinear))
        return TruncatedPolyMap(
            self.linear - other.linear, nl, max(self.max_degree, other.max_degree)
        )

    def __repr__(self) -> str:
        nnz = sum(len(p) for p in self.nonlinear)
        return (
            f"TruncatedPolyMap(n_out={self.n_out}, n_vars={self.n_vars}, "
            f"max_degree={self.max_degree}, nonlinear_terms={nnz})"
        )

    # -- evaluation ---------------------------------------------------------

    @cached_property
    def _compiled(self):
        exps = sorted({e for poly in self.nonlinear for e in poly})
        if not exps:
            return None, None
        index = {e: m for m, e in enumerate(exps)}
        coef = np.zeros((self.n_out, len(exps)), dtype=complex)
        for i, poly in enumerate(self.nonlinear):
            for e, c in poly.items():
                coef[i, index[e]] = c
        return np.array(exps, dtype=int), coef

    def __call__(self, point):
        """Evaluate at ``point`` of shape ``(n_vars,)`` or ``(n_vars, batch)``."""
        x = np.asarray(point)
        if x.shape[0] != self.n_vars:
            raise DimensionMismatch(
                f"point has {x.shape[0]} entries, map expects {self.n_vars}"
            )
        out = self.linear @ x
        exps, coef = self._compiled
        if exps is None:
            return out
        squeeze = x.ndim == 1
        xb = x[:, None] if squeeze else x
        kmax = int(exps.max())
        pw = np.empty((kmax + 1,) + xb.shape, dtype=np.result_type(xb, complex))
        pw[0] = 1.0
        for p in range(1, kmax + 1):
            pw[p] = pw[p - 1] * xb
        mono = np.prod(pw[exps, np.arange(self.n_vars)[None, :]], axis=1)
        nl = coef @ mono
        return out + (nl[:, 0] if squeeze else nl)


def linear_map(matrix, max_degree: int) -> TruncatedPolyMap:
    return TruncatedPolyMap.from_linear(matrix, max_degree)


class _PowerTable:
    """Memoized truncated products ``prod_j inner_j ** m_j``."""

    def __init__(self, comps, n_inner: int, k: int):
        self.comps = comps
        self.k = k
        self.cache = {tuple([0] * len(comps)): {tuple([0] * n_inner): 1.0}}

    def get(self, m):
        hit = self.cache.get(m)
        if hit is not None:
            return hit
        j = next(i for i, p in enumerate(m) if p)
        prev = list(m)
        prev[j] -= 1
        val = poly_mul(self.get(tuple(prev)), self.comps[j], self.k)
        self.cache[m] = val
        return val


def compose_truncated(
    outer: TruncatedPolyMap, inner: TruncatedPolyMap, k: int | None = None
) -> TruncatedPolyMap:
    """``outer(inner(z))`` with every monomial above degree ``k`` dropped.

    Truncation happens inside every product, so intermediate degrees never
    exceed ``k``.
    """
    if outer.n_vars != inner.n_out:
        raise DimensionMismatch(
            f"outer takes {outer.n_vars} variables, inner yields {inner.n_out}"
        )
    if k is None:
        k = outer.max_degree
    table = _PowerTable(inner.components(), inner.n_vars, k)
    result = []
    for i in range(outer.n_out):
        acc: dict = {}
        for m, c in outer.component(i).items():
            if sum(m) > k:
                continue
            for e, v in table.get(m).items():
                acc[e] = acc.get(e, 0.0) + c * v
        result.append(prune(acc))
    return TruncatedPolyMap.from_components(result, inner.n_vars, k)


def invert_near_identity(h_map: TruncatedPolyMap, k: int | None = None) -> TruncatedPolyMap:
    """Order-``k`` power-series inverse of ``z -> z + h(z)``.

    Uses the fixed point ``S = id - h o S``; pass ``j`` pins every degree up
    to ``j + 1`` because ``h`` starts at degree 2.
    """
    if k is None:
        k = h_map.max_degree
    n = h_map.n_vars
    if h_map.n_out != n or not np.allclose(h_map.linear, np.eye(n), atol=1e-12, rtol=0):
        raise NotNearIdentity("linear part must be the identity")
    h = h_map.nonlinear_only()
    ident = TruncatedPolyMap.identity(n, k)
    s = ident
    for _ in range(k - 1):
        s = ident - compose_truncated(h, s, k)
    return s.truncated(k)


def jacobian_polys(m: TruncatedPolyMap) -> list[list[dict]]:
    """``J[i][l]`` is the polynomial ``d m_i / d z_l``."""
    comps = m.components()
    return [[poly_deriv(c, l) for l in range(m.n_vars)] for c in comps]


def is_conjugate_closed(m: TruncatedPolyMap, tol: float = 1e-9) -> bool:
    """Check component ``2i+1`` is the conjugate of ``2i`` with pair-swapped variables."""
    if m.n_out % 2 or m.n_vars % 2:
        return False
    for i in range(0, m.n_out, 2):
        mate = conjugate_partner(m.component(i))
        other = m.component(i + 1)
        scale = max([1.0] + [abs(c) for c in other.values()])
        for e in set(mate) | set(other):
            if abs(mate.get(e, 0.0) - other.get(e, 0.0)) > tol * scale:
                return False
    return True


def enforce_conjugate_closure(m: TruncatedPolyMap) -> TruncatedPolyMap:
    """Overwrite each odd component with the partner of the even one before it."""
    comps = m.components()
    for i in range(0, m.n_out, 2):
        comps[i + 1] = conjugate_partner(comps[i])
    return TruncatedPolyMap.from_components(comps, m.n_vars, m.max_degree)


# ---------------------------------------------------------------------------
# trigonometric-affine vector fields


@dataclass(frozen=True)
class TrigTerm:
    """``coeff * func(direction . x + phase)`` added to output ``row``."""

    row: int
    coeff: float
    func: str
    direction: tuple
    phase: float = 0.0

    def __post_init__(self):
        if self.func not in ("sin", "cos"):
            raise ValueError(f"func must be 'sin' or 'cos', got {self.func!r}")
        object.__setattr__(self, "direction", tuple(int(c) for c in self.direction))


@dataclass(frozen=True, eq=False)
class TrigVectorField:
    """``x' = constant + linear @ x + sum of sin/cos terms`` with affine arguments."""

    constant: np.ndarray
    linear: np.ndarray
    terms: tuple = ()
    angle_indices: tuple | None = None

    def __post_init__(self):
        c = np.array(self.constant, dtype=float)
        lin = np.array(self.linear, dtype=float)
        n = c.shape[0]
        if lin.shape != (n, n):
            raise DimensionMismatch("linear part must be n x n")
        for t in self.terms:
            if len(t.direction) != n or not 0 <= t.row < n:
                raise DimensionMismatch(f"term {t} does not fit a {n}-state field")
        c.setflags(write=False)
        lin.setflags(write=False)
        object.__setattr__(self, "constant", c)
        object.__setattr__(self, "linear", lin)
        object.__setattr__(self, "terms", tuple(self.terms))
        if self.angle_indices is None:
            object.__setattr__(self, "angle_indices", tuple(range(0, n, 2)))

    @property
    def n(self) -> int:
        return self.constant.shape[0]

    @cached_property
    def _arrays(self):
        n, t = self.n, len(self.terms)
        direction = np.zeros((t, n))
        phase = np.zeros(t)
        coeff = np.zeros(t)
        is_sin = np.zeros(t, dtype=bool)
        scatter = np.zeros((n, t))
        for m, term in enumerate(self.terms):
            direction[m] = term.direction
            phase[m] = term.phase
            coeff[m] = term.coeff
            is_sin[m] = term.func == "sin"
            scatter[term.row, m] = 1.0
        return direction, phase, coeff, is_sin, scatter

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape[0] != self.n:
            raise DimensionMismatch(f"state has {x.shape[0]} entries, field has {self.n}")
        direction, phase, coeff, is_sin, scatter = self._arrays
        squeeze = x.ndim == 1
        xb = x[:, None] if squeeze else x
        arg = direction @ xb + phase[:, None]
        val = np.where(is_sin[:, None], np.sin(arg), np.cos(arg)) * coeff[:, None]
        out = self.constant[:, None] + self.linear @ xb + scatter @ val
        return out[:, 0] if squeeze else out

    def jacobian(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        direction, phase, coeff, is_sin, scatter = self._arrays
        arg = direction @ x + phase
        dval = np.where(is_sin, np.cos(arg), -np.sin(arg)) * coeff
        return self.linear + scatter @ (dval[:, None] * direction)

    def without_constant_rows(self, rows) -> "TrigVectorField":
        """Copy with the constants of ``rows`` set to zero."""
        c = self.constant.copy()
        c[list(rows)] = 0.0
        return TrigVectorField(c, self.linear, self.terms, self.angle_indices)

    def with_constant(self, constant) -> "TrigVectorField":
        return TrigVectorField(constant, self.linear, self.terms, self.angle_indices)


_SIN_CYCLE = (np.sin, np.cos, lambda a: -np.sin(a), lambda a: -np.cos(a))


def _nth_derivative(func: str, n: int, arg: float) -> float:
    shift = n if func == "sin" else n + 1
    return _SIN_CYCLE[shift % 4](arg)


def taylor_trig(field: TrigVectorField, x0, k: int):
    """Degree-``k`` Taylor expansion of ``field`` in ``y = x - x0``.

    Returns ``(jet, constant)`` where ``constant = field(x0)`` is reported
    separately because the map itself carries no constant term.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    x0 = np.asarray(x0, dtype=float)
    n = field.n
    if x0.shape != (n,):
        raise DimensionMismatch(f"x0 must have shape ({n},)")
    comps: list[dict] = [{} for _ in range(n)]
    for i in range(n):
        for j in np.flatnonzero(field.linear[i]):
            e = unit(n, int(j))
            comps[i][e] = comps[i].get(e, 0.0) + field.linear[i, j]
    power_cache: dict = {}
    for term in field.terms:
        d = term.direction
        if d not in power_cache:
            s = {unit(n, j): float(c) for j, c in enumerate(d) if c}
            pows = [s]
            for _ in range(k - 1):
                pows.append(poly_mul(pows[-1], s, k))
            power_cache[d] = pows
        arg = float(np.dot(d, x0)) + term.phase
        row = comps[term.row]
        for p, sp in enumerate(power_cache[d], start=1):
            w = term.coeff * _nth_derivative(term.func, p, arg) / math.factorial(p)
            if w == 0.0:
                continue
            for e, c in sp.items():
                row[e] = row.get(e, 0.0) + w * c
    comps = [prune(c) for c in comps]
    return TruncatedPolyMap.from_components(comps, n, k), field(x0)
