import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import coeffwise_close, random_poly_map, slope
from oscdecouple.errors import DimensionMismatch, NotNearIdentity
from oscdecouple.fixtures import X_SEP
from oscdecouple.poly import (
    TrigTerm,
    TrigVectorField,
    TruncatedPolyMap,
    compose_truncated,
    enforce_conjugate_closure,
    invert_near_identity,
    is_conjugate_closed,
    linear_map,
    monomial_count,
    monomials,
    poly_eval,
    poly_mul,
    taylor_trig,
)


@pytest.mark.parametrize("n, d, expected", [(4, 2, 10), (4, 3, 20), (2, 2, 3), (3, 0, 1)])
def test_monomial_count(n, d, expected):
    assert monomial_count(n, d) == expected
    assert len(monomials(n, d)) == expected


@given(st.integers(1, 6), st.integers(0, 4))
def test_monomial_count_matches_enumeration(n, d):
    ms = monomials(n, d)
    assert len(ms) == len(set(ms)) == monomial_count(n, d)
    assert all(sum(m) == d for m in ms)


def test_monomial_count_rejects_bad_input():
    with pytest.raises(ValueError):
        monomial_count(0, 2)


def test_eval_zero_and_identity():
    z = TruncatedPolyMap.zero(3, 3)
    p = np.array([1.0, -2.0, 0.5j])
    assert np.all(z(p) == 0)
    assert np.allclose(TruncatedPolyMap.identity(3, 3)(p), p)


def test_eval_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        TruncatedPolyMap.identity(3, 2)(np.ones(2))


def test_eval_batch_matches_pointwise():
    rng = np.random.default_rng(0)
    m = random_poly_map(rng, 3, 3, density=0.5)
    pts = rng.standard_normal((3, 5))
    batch = m(pts)
    for j in range(5):
        assert np.allclose(batch[:, j], m(pts[:, j]))


def test_eval_simplified_cubic_vanishes_at_uep():
    # w1' = -166 w2 + 5 w2^2 + 35.3 w2^3 at (0, 2.0986)
    f = TruncatedPolyMap.from_components([{(0, 1): -166.0, (0, 2): 5.0, (0, 3): 35.3}, {(1, 0): 1.0}], 2, 3)
    assert abs(f(np.array([0.0, 2.0986]))[0]) < 0.1


def test_storage_drops_high_degree_and_tiny_terms():
    m = TruncatedPolyMap(np.eye(2), ({(2, 0): 1.0, (3, 1): 5.0, (1, 1): 1e-14}, {}), 3)
    assert dict(m.nonlinear[0]) == {(2, 0): 1.0}


def test_compose_with_identity():
    rng = np.random.default_rng(1)
    f = random_poly_map(rng, 3, 3, linear=rng.standard_normal((3, 3)))
    assert coeffwise_close(compose_truncated(f, TruncatedPolyMap.identity(3, 3), 3), f, 1e-14)


def test_compose_linear_is_matrix_product():
    rng = np.random.default_rng(2)
    a, b = rng.standard_normal((3, 3)), rng.standard_normal((3, 3))
    c = compose_truncated(linear_map(a, 3), linear_map(b, 3), 3)
    assert np.allclose(c.linear, a @ b)
    assert c.is_linear()


def test_compose_two_variable_cancellation_condition():
    # z1' = l1 z1 + b z1 z2 under z = u + h: the u1 u2 coefficient of the
    # composed-and-rescaled field is b - l2 h (the degree-2 homological condition)
    l1, l2, b, h = -0.3 + 2j, -0.3 - 2j, 0.7 - 0.2j, 0.4 + 0.1j
    g = TruncatedPolyMap(np.diag([l1, l2]), ({(1, 1): b}, {}), 2)
    hm = TruncatedPolyMap(np.eye(2), ({(1, 1): h}, {}), 2)
    composed = compose_truncated(g, hm, 2)
    # subtract Dh . Lambda u, the degree-2 part of (I + Dh) V
    dh_lam = {(1, 1): h * (l1 + l2)}
    coeff = composed.nonlinear[0][(1, 1)] - dh_lam[(1, 1)]
    assert coeff == pytest.approx(b + l1 * h - h * (l1 + l2))
    assert coeff == pytest.approx(b - l2 * h)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000))
def test_compose_associative(seed):
    rng = np.random.default_rng(seed)
    f = random_poly_map(rng, 3, 3, density=0.5, linear=rng.standard_normal((3, 3)))
    g = random_poly_map(rng, 3, 3, scale=0.5, density=0.5)
    h = random_poly_map(rng, 3, 3, scale=0.5, density=0.5)
    left = compose_truncated(compose_truncated(f, g, 3), h, 3)
    right = compose_truncated(f, compose_truncated(g, h, 3), 3)
    assert coeffwise_close(left, right, 1e-10)


def test_compose_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        compose_truncated(TruncatedPolyMap.identity(3, 2), TruncatedPolyMap.identity(2, 2), 2)


def test_invert_identity():
    ident = TruncatedPolyMap.identity(4, 3)
    assert coeffwise_close(invert_near_identity(ident, 3), ident, 0)


def test_invert_single_quadratic_term():
    a = 0.7
    h = TruncatedPolyMap(np.eye(2), ({(0, 2): a}, {}), 3)
    s = invert_near_identity(h, 3)
    assert dict(s.nonlinear[0]) == pytest.approx({(0, 2): -a})
    assert dict(s.nonlinear[1]) == {}


def test_invert_rejects_non_identity_linear_part():
    with pytest.raises(NotNearIdentity):
        invert_near_identity(linear_map(2 * np.eye(2), 3), 3)


def test_invert_round_trip_small_points():
    # coefficients of order 0.1 on half the monomials
    rng = np.random.default_rng(3)
    h = random_poly_map(rng, 4, 3, scale=0.1, density=0.5)
    s = invert_near_identity(h, 3)
    for _ in range(10):
        z = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        z *= 1e-2 / np.linalg.norm(z)
        assert np.linalg.norm(s(h(z)) - z) <= 1e-6 * np.linalg.norm(z)


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from([2, 3, 4]))
def test_inversion_residual_scaling(seed, k):
    rng = np.random.default_rng(seed)
    h = random_poly_map(rng, 3, k)
    s = invert_near_identity(h, k)
    z = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    z /= np.linalg.norm(z)
    amps = np.geomspace(1e-3, 1e-1, 5)
    res = [np.linalg.norm(s(h(r * z)) - r * z) for r in amps]
    assert slope(amps, res) >= k + 0.5


def test_taylor_sin_and_cos():
    f = TrigVectorField(np.zeros(1), np.zeros((1, 1)), (TrigTerm(0, 1.0, "sin", (1,)),), ())
    jet, const = taylor_trig(f, np.zeros(1), 3)
    assert const == pytest.approx([0.0])
    assert jet.linear[0, 0] == pytest.approx(1.0)
    assert dict(jet.nonlinear[0]) == pytest.approx({(3,): -1 / 6})
    g = TrigVectorField(np.zeros(1), np.zeros((1, 1)), (TrigTerm(0, 1.0, "cos", (1,)),), ())
    jet, const = taylor_trig(g, np.zeros(1), 3)
    assert const == pytest.approx([1.0])
    assert jet.linear[0, 0] == 0
    assert dict(jet.nonlinear[0]) == pytest.approx({(2,): -0.5})


def test_taylor_ninebus_constant_vanishes(ninebus_field):
    _, const = taylor_trig(ninebus_field, X_SEP, 3)
    assert np.max(np.abs(const)) < 1e-4


def _fd_derivatives(field, x0, h=1e-4):
    n = field.n
    first = np.zeros((n, n))
    second = np.zeros((n, n, n))
    eye = np.eye(n)
    for a in range(n):
        first[:, a] = (field(x0 + h * eye[a]) - field(x0 - h * eye[a])) / (2 * h)
        for b in range(n):
            second[:, a, b] = (
                field(x0 + h * eye[a] + h * eye[b])
                - field(x0 + h * eye[a] - h * eye[b])
                - field(x0 - h * eye[a] + h * eye[b])
                + field(x0 - h * eye[a] - h * eye[b])
            ) / (4 * h * h)
    return first, second


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000))
def test_taylor_matches_finite_differences(seed):
    rng = np.random.default_rng(seed)
    n = 4
    terms = tuple(
        TrigTerm(int(rng.integers(n)), float(rng.normal()), str(rng.choice(["sin", "cos"])),
                 tuple(int(v) for v in rng.integers(-1, 2, n)), float(rng.normal()))
        for _ in range(6)
    )
    field = TrigVectorField(rng.normal(size=n), rng.normal(size=(n, n)), terms)
    x0 = rng.normal(size=n)
    jet, _ = taylor_trig(field, x0, 3)
    first, second = _fd_derivatives(field, x0)
    assert np.allclose(jet.linear.real, first, rtol=1e-6, atol=1e-6)
    hess = np.zeros((n, n, n))
    for i in range(n):
        for e, c in jet.nonlinear[i].items():
            if sum(e) != 2:
                continue
            idx = [j for j, p in enumerate(e) for _ in range(p)]
            a, b = idx
            if a == b:
                hess[i, a, a] = 2 * c.real
            else:
                hess[i, a, b] = hess[i, b, a] = c.real
    assert np.allclose(hess, second, rtol=1e-6, atol=1e-5)


def _closed_map(rng, n_pairs, k):
    n = 2 * n_pairs
    m = random_poly_map(rng, n, k, density=0.4, linear=np.diag(rng.normal(size=n) + 0j))
    lin = np.zeros((n, n), dtype=complex)
    for i in range(0, n, 2):
        lam = complex(rng.normal(), rng.normal())
        lin[i, i], lin[i + 1, i + 1] = lam, np.conj(lam)
    return enforce_conjugate_closure(m.with_linear(lin))


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000))
def test_conjugate_closure_preserved(seed):
    rng = np.random.default_rng(seed)
    f = _closed_map(rng, 2, 3)
    g = enforce_conjugate_closure(random_poly_map(rng, 4, 3, scale=0.3, density=0.4))
    assert is_conjugate_closed(f) and is_conjugate_closed(g)
    assert is_conjugate_closed(compose_truncated(f, g, 3))
    assert is_conjugate_closed(invert_near_identity(g, 3))
    assert is_conjugate_closed(f + g)


def test_conjugate_closed_map_is_real_on_conjugate_points():
    rng = np.random.default_rng(4)
    f = _closed_map(rng, 2, 3)
    a, b = complex(*rng.normal(size=2)), complex(*rng.normal(size=2))
    out = f(np.array([a, np.conj(a), b, np.conj(b)]))
    assert np.allclose(out[1], np.conj(out[0]))
    assert np.allclose(out[3], np.conj(out[2]))


def test_poly_mul_truncates():
    a = {(1, 0): 1.0, (0, 1): 1.0}
    sq = poly_mul(a, a, 2)
    assert sq == {(2, 0): 1.0, (1, 1): 2.0, (0, 2): 1.0}
    assert poly_mul(sq, a, 2) == {}
    assert poly_eval(sq, [2.0, 3.0]) == pytest.approx(25.0)
