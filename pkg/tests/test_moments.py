import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.polynomial import polynomial as P

from oracles import adaptive_integral
from stablequad import WEIGHTS, Interval, WeightFn, make_equidistant, make_scattered
from stablequad.dop import build_dop_basis, eval_dop
from stablequad.errors import EvaluationError, InvalidArgument
from stablequad.moments import compute_moments, gauss_legendre


def test_one_point_rule(unit):
    gl = gauss_legendre(1, unit)
    np.testing.assert_allclose(gl.nodes, [0.0], atol=1e-16)
    np.testing.assert_allclose(gl.weights, [2.0], rtol=1e-15)


def test_two_point_rule(unit):
    gl = gauss_legendre(2, unit)
    r = 1 / np.sqrt(3)
    np.testing.assert_allclose(gl.nodes, [-r, r], rtol=1e-15)
    np.testing.assert_allclose(gl.weights, [1.0, 1.0], rtol=1e-15)


def test_five_points_integrate_x8(unit):
    gl = gauss_legendre(5, unit)
    assert gl.integrate(gl.nodes**8) == pytest.approx(2 / 9, abs=1e-14)


@pytest.mark.parametrize("J", [1, 2, 3, 10, 57, 200, 400])
def test_rule_invariants(unit, J):
    gl = gauss_legendre(J, unit)
    assert np.all(gl.weights > 0)
    assert gl.weights.sum() == pytest.approx(2.0, abs=1e-12)
    assert np.all(np.diff(gl.nodes) > 0)
    np.testing.assert_allclose(gl.nodes, -gl.nodes[::-1], atol=1e-12)


def test_rule_matches_numpy_leggauss():
    x, w = np.polynomial.legendre.leggauss(123)
    gl = gauss_legendre(123)
    np.testing.assert_allclose(gl.nodes, x, atol=1e-14)
    np.testing.assert_allclose(gl.weights, w, atol=1e-14)


def test_mapped_interval():
    iv = Interval(0.0, 3.0)
    gl = gauss_legendre(6, iv)
    assert gl.weights.sum() == pytest.approx(3.0, rel=1e-14)
    assert gl.integrate(gl.nodes**5) == pytest.approx(3.0**6 / 6, rel=1e-13)


def test_gauss_legendre_needs_positive_j():
    with pytest.raises(InvalidArgument):
        gauss_legendre(0)


@settings(max_examples=60, deadline=None)
@given(J=st.integers(1, 30), seed=st.integers(0, 10**6))
def test_degree_exactness(J, seed):
    rng = np.random.default_rng(seed)
    coef = rng.normal(size=2 * J)  # degree 2J-1
    integ = P.polyint(coef)
    exact = P.polyval(1.0, integ) - P.polyval(-1.0, integ)
    gl = gauss_legendre(J)
    approx = gl.integrate(P.polyval(gl.nodes, coef))
    scale = np.abs(coef).sum() * 2
    assert abs(approx - exact) <= 1e-12 * scale


def test_constant_weight_moment(unit):
    basis = build_dop_basis(make_equidistant(unit, 4), 0)
    m = compute_moments(basis, WEIGHTS["one"])
    assert m.values[0] == pytest.approx(1.0, rel=1e-14)
    assert m.J_used == 200 and m.d == 0


@pytest.mark.parametrize("N", [3, 17, 100])
def test_cos_weight_full_periods(unit, N):
    basis = build_dop_basis(make_equidistant(unit, N), 0)
    m = compute_moments(basis, WEIGHTS["cos20pix"])
    assert abs(m.values[0]) <= 1e-14


@pytest.mark.parametrize("name", ["one", "one_minus_x2", "cos20pix"])
def test_moments_match_adaptive_oracle_smooth(unit, name):
    w = WEIGHTS[name]
    basis = build_dop_basis(make_equidistant(unit, 50), 10)
    m = compute_moments(basis, w, 200)
    for k in range(11):
        ref = adaptive_integral(lambda x: eval_dop(basis, k, [x])[0] * float(w(x)), -1, 1)
        assert m.values[k] == pytest.approx(ref, abs=1e-12)


def test_moments_match_adaptive_oracle_x_sqrt(unit):
    # Stated target 1e-12 at J = 200. Gauss-Legendre converges only like
    # J^-3 against the sqrt(1 - x) endpoint behaviour, so this is expected
    # to fail at about 5e-8.
    w = WEIGHTS["x_sqrt_one_minus_x3"]
    basis = build_dop_basis(make_equidistant(unit, 50), 10)
    m = compute_moments(basis, w, 200)
    for k in range(11):
        ref = adaptive_integral(lambda x: eval_dop(basis, k, [x])[0] * float(w(x)), -1, 1, (0.0,))
        assert m.values[k] == pytest.approx(ref, abs=1e-12)


@pytest.mark.parametrize("name", ["one", "one_minus_x2", "cos20pix"])
@pytest.mark.parametrize("d", [0, 7, 20])
def test_moment_convergence_smooth(unit, name, d):
    basis = build_dop_basis(make_scattered(unit, 120, seed=4), d)
    m200 = compute_moments(basis, WEIGHTS[name], 200).values
    m400 = compute_moments(basis, WEIGHTS[name], 400).values
    assert np.abs(m200 - m400).max() <= 1e-12


@given(seed=st.integers(0, 10**6))
@settings(max_examples=20, deadline=None)
def test_moments_linear_in_basis(seed):
    # L_J[sum_k c_k phi_k] = sum_k c_k L_J[phi_k]
    unit = Interval()
    rng = np.random.default_rng(seed)
    basis = build_dop_basis(make_equidistant(unit, 30), 6)
    w = WEIGHTS["x_sqrt_one_minus_x3"]
    c = rng.normal(size=7)
    gl = gauss_legendre(200, unit)
    combo = sum(c[k] * eval_dop(basis, k, gl.nodes) for k in range(7))
    lhs = gl.integrate(combo * w(gl.nodes))
    rhs = c @ compute_moments(basis, w).values
    assert lhs == pytest.approx(rhs, abs=1e-13 * (1 + np.abs(c).sum()))


def test_non_finite_weight_raises(unit):
    basis = build_dop_basis(make_equidistant(unit, 5), 1)
    bad = WeightFn.custom(lambda x: 1 / x)
    with pytest.raises(EvaluationError):
        compute_moments(basis, bad, J=3)  # J = 3 puts a node at 0
