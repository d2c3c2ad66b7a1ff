import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings, strategies as st

from fdmderham.errors import InvalidArgument, NumericalFailure
from fdmderham.sparse import (cholesky, icc_imposed, order, submatrix,
                              symbolic_cholesky)
from fdmderham.sparse.cholesky import weighted_symbolic_nnz
from fdmderham.sparse.csr import as_csr, lower_pattern

from asserts.asserts import assert_lower_pattern_subset
import testcommon

# SPD, but incomplete Cholesky on its own pattern breaks down
KERSHAW = np.array([[3.0, -2.0, 0.0, 2.0],
                    [-2.0, 3.0, -2.0, 0.0],
                    [0.0, -2.0, 3.0, -2.0],
                    [2.0, 0.0, -2.0, 3.0]])


def test_identity():
    factor = cholesky(sp.identity(5))
    assert factor.nnz == 5
    np.testing.assert_allclose(factor.L.toarray(), np.eye(5))


@pytest.mark.parametrize('n', [10, 30])
def test_tridiagonal(n):
    a = testcommon.laplacian_1d(n)
    factor = cholesky(a)
    assert factor.nnz == 2 * n - 1
    b = np.arange(n, dtype=float)
    np.testing.assert_allclose(factor.solve(b), np.linalg.solve(a.toarray(), b),
                               rtol=1e-10)
    assert_lower_pattern_subset(factor.L, lower_pattern(a))


@settings(max_examples=25, deadline=None)
@given(n=st.integers(1, 40), seed=st.integers(0, 2 ** 16),
       ordering=st.sampled_from(['natural', 'rcm']))
def test_reconstruction(n, seed, ordering):
    a = testcommon.random_spd(n, seed)
    factor = cholesky(a, ordering)
    diff = abs(factor.reconstruct() - a)
    assert diff.nnz == 0 or diff.max() <= 1e-10 * abs(a).max()
    assert factor.L.nnz <= factor.nnz


def test_orderings_give_same_solution():
    n = 40
    a = testcommon.laplacian_1d(n)
    points = np.stack([np.arange(n), np.zeros(n)], axis=1).astype(float)
    b = np.random.default_rng(0).standard_normal(n)
    natural = cholesky(a, 'natural').solve(b)
    for name in ('rcm', 'nested_dissection'):
        np.testing.assert_allclose(cholesky(a, name, points).solve(b), natural,
                                   rtol=1e-10)


def test_nested_dissection_reduces_fill_on_grid():
    n = 32
    a = testcommon.laplacian_2d(n)
    perm = order(a, 'nested_dissection', testcommon.grid_points_2d(n))
    assert sorted(perm.tolist()) == list(range(n * n))
    natural = symbolic_cholesky(a).nnz
    dissected = symbolic_cholesky(a[perm][:, perm]).nnz
    assert dissected < natural


def test_order_errors():
    a = testcommon.laplacian_1d(4)
    with pytest.raises(InvalidArgument):
        order(a, 'amd')
    with pytest.raises(InvalidArgument):
        order(a, 'nested_dissection')
    with pytest.raises(InvalidArgument):
        cholesky(a, np.array([0, 1, 1, 2]))
    with pytest.raises(InvalidArgument):
        as_csr(sp.csr_matrix((2, 3)))


def test_nonpositive_pivot_dense():
    with pytest.raises(NumericalFailure) as exc:
        cholesky(np.array([[1.0, 2.0], [2.0, 1.0]]))
    assert exc.value.diagnostics['row'] == 1


def test_nonpositive_pivot_sparse():
    diag = np.ones(15)
    diag[5] = -1.0
    with pytest.raises(NumericalFailure) as exc:
        cholesky(sp.diags(diag))
    assert exc.value.diagnostics['row'] == 5
    assert 'row=5' in str(exc.value)


def test_icc_full_pattern_is_exact():
    a = testcommon.laplacian_2d(6)
    exact = cholesky(a)
    sym = symbolic_cholesky(a).pattern()
    pattern = sp.csr_matrix(sym + sym.T, dtype=bool)
    factor = icc_imposed(a, pattern)
    assert factor.shift == 0.0
    np.testing.assert_allclose(factor.L.toarray(), exact.L.toarray(), atol=1e-14)


def test_icc_diagonal_matrix():
    diag = np.arange(1.0, 6.0)
    pattern = testcommon.laplacian_1d(5) != 0
    factor = icc_imposed(sp.diags(diag), pattern)
    np.testing.assert_allclose(factor.L.toarray(), np.diag(np.sqrt(diag)))
    np.testing.assert_allclose(factor.solve(diag), np.ones(5))


def test_icc_respects_pattern():
    a = testcommon.laplacian_2d(5)
    pattern = a != 0
    factor = icc_imposed(a, pattern)
    assert_lower_pattern_subset(factor.L, pattern)
    assert factor.nnz == lower_pattern(a).nnz


def test_icc_breakdown():
    pattern = KERSHAW != 0
    # the exact factorization exists
    cholesky(KERSHAW)
    with pytest.raises(NumericalFailure):
        icc_imposed(KERSHAW, pattern)
    factor = icc_imposed(KERSHAW, pattern, shift_limit=10.0)
    assert factor.shift > 0.0
    assert np.all(factor.L.diagonal() > 0.0)


def test_icc_pattern_checks():
    a = testcommon.laplacian_1d(4)
    with pytest.raises(InvalidArgument):
        icc_imposed(a, sp.csr_matrix((3, 3), dtype=bool))
    with pytest.raises(InvalidArgument):
        icc_imposed(a, sp.csr_matrix(np.ones((4, 4)) - np.eye(4), dtype=bool))


def test_weighted_symbolic_nnz():
    # two dense blocks coupled along one edge behave like a dense matrix
    graph = sp.csr_matrix(np.ones((2, 2)))
    assert weighted_symbolic_nnz(graph, [2, 3]) == 15
    assert weighted_symbolic_nnz(sp.identity(2), [2, 3]) == 9


def test_submatrix():
    a = testcommon.laplacian_1d(5)
    sub = submatrix(a, [0, 2, 3])
    np.testing.assert_array_equal(sub.toarray(),
                                  [[2.0, 0.0, 0.0], [0.0, 2.0, -1.0],
                                   [0.0, -1.0, 2.0]])
