import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fdmderham.errors import InvalidArgument
from fdmderham.fdm1d import (build_fdm_basis, gauss_legendre_rule,
                             gauss_lobatto_rule, jacobi_eigh,
                             lagrange_tabulate, reference_matrices_gll)


def test_gll_small_rules():
    rule = gauss_lobatto_rule(2)
    np.testing.assert_allclose(rule.points, [-1.0, 1.0])
    np.testing.assert_allclose(rule.weights, [1.0, 1.0])
    rule = gauss_lobatto_rule(3)
    np.testing.assert_allclose(rule.points, [-1.0, 0.0, 1.0], atol=1e-15)
    np.testing.assert_allclose(rule.weights, [1 / 3, 4 / 3, 1 / 3])


@pytest.mark.parametrize('n', [2, 4, 5, 9])
def test_gll_exactness(n):
    rule = gauss_lobatto_rule(n)
    deg = 2 * n - 3
    assert rule.exactness_degree == deg
    for m in range(deg + 1):
        exact = 0.0 if m % 2 else 2.0 / (m + 1)
        assert abs(rule.integrate(rule.points ** m) - exact) < 1e-13


@pytest.mark.parametrize('n', [1, 3, 6])
def test_gauss_legendre_exactness(n):
    rule = gauss_legendre_rule(n)
    for m in range(2 * n):
        exact = 0.0 if m % 2 else 2.0 / (m + 1)
        assert abs(rule.integrate(rule.points ** m) - exact) < 1e-13


def test_invalid_rules():
    with pytest.raises(InvalidArgument):
        gauss_lobatto_rule(1)
    with pytest.raises(InvalidArgument):
        gauss_legendre_rule(0)
    with pytest.raises(InvalidArgument):
        lagrange_tabulate([0.0, 0.0, 1.0], [0.5])


@settings(max_examples=40, deadline=None)
@given(n=st.integers(2, 10), i=st.integers(0, 997))
def test_lagrange_partition_of_unity(n, i):
    nodes = gauss_lobatto_rule(n).points
    x = -1.0 + 2.0 * i / 997
    val, der = lagrange_tabulate(nodes, [x])
    assert abs(val.sum() - 1.0) < 1e-10
    assert abs(der.sum()) < 1e-7


def test_lagrange_reproduces_polynomials():
    nodes = gauss_lobatto_rule(5).points
    xs = np.linspace(-1, 1, 13)
    val, der = lagrange_tabulate(nodes, xs)
    np.testing.assert_allclose(val @ nodes ** 3, xs ** 3, atol=1e-12)
    np.testing.assert_allclose(der @ nodes ** 3, 3 * xs ** 2, atol=1e-11)


def test_reference_matrices_gll_p1():
    a, b = reference_matrices_gll(1)
    np.testing.assert_allclose(a, [[0.5, -0.5], [-0.5, 0.5]])
    np.testing.assert_allclose(b, [[2 / 3, 1 / 3], [1 / 3, 2 / 3]])


def test_jacobi_matches_numpy():
    rng = np.random.default_rng(3)
    m = rng.standard_normal((6, 6))
    m = m + m.T
    mu, vec = jacobi_eigh(m)
    np.testing.assert_allclose(np.sort(mu), np.linalg.eigvalsh(m), atol=1e-12)
    np.testing.assert_allclose(vec.T @ vec, np.eye(6), atol=1e-12)
    np.testing.assert_allclose(m @ vec, vec * mu, atol=1e-11)


def test_basis_p2_closed_form():
    basis = build_fdm_basis(2)
    assert basis.eigenvalues[1] == pytest.approx(2.5, rel=1e-13)
    assert basis.B[0, 0] == pytest.approx(0.25, rel=1e-12)
    assert basis.B[0, 2] == pytest.approx(-1 / 12, rel=1e-12)


@pytest.mark.parametrize('p', [1, 2, 3, 5, 8, 12])
def test_basis_orthogonality(p):
    basis = build_fdm_basis(p)
    inner, gamma = basis.interior, basis.interface
    np.testing.assert_allclose(basis.B[np.ix_(inner, inner)], np.eye(p - 1),
                               atol=1e-10)
    np.testing.assert_allclose(basis.B[np.ix_(inner, gamma)], 0.0, atol=1e-10)
    np.testing.assert_allclose(basis.A[np.ix_(inner, inner)],
                               np.diag(basis.eigenvalues[1:]), atol=1e-9)
    assert np.all(np.diff(basis.eigenvalues[1:]) >= 0.0)


@pytest.mark.parametrize('p', [2, 4, 7])
def test_derivative_matrix(p):
    basis = build_fdm_basis(p)
    xs = np.linspace(-0.97, 0.93, 11)
    _, ds = basis.tabulate_s(xs)
    np.testing.assert_allclose(ds, basis.tabulate_r(xs) @ basis.D, atol=1e-9)
    inner = basis.interior
    np.testing.assert_allclose(basis.D[np.ix_(inner, inner)],
                               np.diag(np.sqrt(basis.eigenvalues[1:])))


@pytest.mark.parametrize('p', [1, 3, 6])
def test_broken_basis(p):
    basis = build_fdm_basis(p)
    np.testing.assert_allclose(basis.G1d.T @ basis.G1d, basis.B, atol=1e-12)
    rule = gauss_legendre_rule(p + 1)
    sbar = basis.tabulate_broken(rule.points)
    np.testing.assert_allclose(sbar.T @ (rule.weights[:, None] * sbar),
                               np.eye(p + 1), atol=1e-10)
    r = basis.tabulate_r(rule.points)
    np.testing.assert_allclose(r.T @ (rule.weights[:, None] * r),
                               np.eye(p), atol=1e-10)


def test_basis_invalid_degree():
    with pytest.raises(InvalidArgument):
        build_fdm_basis(0)
